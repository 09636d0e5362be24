#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace arrowflow {

/// Minimal row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

/// y = x * M for a row vector x of length M.rows.
inline std::vector<double> row_times_matrix(std::span<const double> x, const Matrix& m) {
  if (x.size() != m.rows) throw std::invalid_argument("row_times_matrix: dimension mismatch");
  std::vector<double> y(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double xv = x[r];
    if (xv == 0.0) continue;
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) y[c] += xv * row[c];
  }
  return y;
}

}  // namespace arrowflow
