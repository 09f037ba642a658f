#include "msftgcn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "msftgcn/error.hpp"

namespace msftgcn {

std::string to_string(const Dims3& dims) {
  return std::to_string(dims.d1) + "x" + std::to_string(dims.d2) + "x" + std::to_string(dims.d3);
}

DenseTensor3::DenseTensor3(Dims3 dims, double fill) : dims_(dims), values_(dims.size(), fill) {}

DenseTensor3::DenseTensor3(Dims3 dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.size()) {
    throw ShapeError("tensor of dims " + to_string(dims_) + " needs " +
                     std::to_string(dims_.size()) + " values, got " +
                     std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DataError("non-finite tensor value at flat index " + std::to_string(k));
    }
  }
}

bool DenseTensor3::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseTensor3& DenseTensor3::operator+=(const DenseTensor3& other) {
  if (other.dims_ != dims_) {
    throw ShapeError("cannot add " + to_string(other.dims_) + " to " + to_string(dims_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

DenseTensor3& DenseTensor3::operator*=(double alpha) noexcept {
  for (double& v : values_) v *= alpha;
  return *this;
}

DenseTensor3 operator+(DenseTensor3 a, const DenseTensor3& b) {
  a += b;
  return a;
}

DenseTensor3 operator-(const DenseTensor3& a, const DenseTensor3& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("cannot subtract " + to_string(b.dims()) + " from " + to_string(a.dims()));
  }
  DenseTensor3 out(a.dims());
  for (std::size_t k = 0; k < a.size(); ++k) out.values()[k] = a.values()[k] - b.values()[k];
  return out;
}

DenseTensor3 operator*(double alpha, DenseTensor3 a) {
  a *= alpha;
  return a;
}

double max_abs_diff(const DenseTensor3& a, const DenseTensor3& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("cannot compare " + to_string(a.dims()) + " with " + to_string(b.dims()));
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  }
  return m;
}

double frobenius_norm(const DenseTensor3& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                     std::to_string(rows * cols) + " values, got " +
                     std::to_string(values_.size()));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matrix product of " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("cannot compare matrices of different shape");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  }
  return m;
}

}  // namespace msftgcn
