#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace cachegain {

// Dense row-major matrix; rows index nodes, columns index items.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        a_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return a_[idx(r, c)]; }
  double operator()(int r, int c) const { return a_[idx(r, c)]; }

  std::span<double> row(int r) {
    return {a_.data() + idx(r, 0), static_cast<size_t>(cols_)};
  }
  std::span<const double> row(int r) const {
    return {a_.data() + idx(r, 0), static_cast<size_t>(cols_)};
  }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  size_t size() const { return a_.size(); }

  double total() const {
    double s = 0.0;
    for (double x : a_) s += x;
    return s;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  size_t idx(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return static_cast<size_t>(r) * static_cast<size_t>(cols_) +
           static_cast<size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Placement holds {0,1} entries, Allocation holds [0,1] entries; both are
// node-by-item matrices and share the storage type.
using Placement = Matrix;
using Allocation = Matrix;

}  // namespace cachegain
