#include "ot/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace ot {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) {
      throw std::invalid_argument("ragged row data");
    }
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

double Matrix::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Matrix::max_entry() const {
  double m = 0.0;
  bool first = true;
  for (double v : data_) {
    if (first || v > m) m = v;
    first = false;
  }
  return m;
}

double Matrix::min_entry() const {
  double m = 0.0;
  bool first = true;
  for (double v : data_) {
    if (first || v < m) m = v;
    first = false;
  }
  return m;
}

std::vector<double> Matrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j];
    out[i] = s;
  }
  return out;
}

std::vector<double> Matrix::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j];
  }
  return out;
}

double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

}  // namespace ot
