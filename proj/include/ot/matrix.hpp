#pragma once

#include <cstddef>
#include <vector>

namespace ot {

// Dense row-major matrix of doubles. All reductions over a Matrix in this
// library iterate rows outer, columns inner, accumulating left to right,
// so scalar results are bit-reproducible across runs.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Row-major, left-to-right accumulation.
  double sum() const;
  double max_entry() const;
  double min_entry() const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

// l1 norm accumulated left to right.
double l1_norm(const std::vector<double>& v);

}  // namespace ot
