#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace msftgcn {

// Index convention: formulas in the docs are 1-based in the time axis
// (t = 1..T). Storage is 0-based everywhere, so slice t lives at index t-1.

struct Dims3 {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t d3 = 0;

  std::size_t size() const noexcept { return d1 * d2 * d3; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

std::string to_string(const Dims3& dims);

// Real third-order array, row-major: element (i, j, t) sits at (i*d2 + j)*d3 + t,
// so every mode-3 fiber (fixed i, j) is contiguous.
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  explicit DenseTensor3(Dims3 dims, double fill = 0.0);
  // Validates that values.size() matches dims and that every value is finite.
  DenseTensor3(Dims3 dims, std::vector<double> values);

  static DenseTensor3 zeros(Dims3 dims) { return DenseTensor3(dims); }

  const Dims3& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t t) noexcept {
    return values_[(i * dims_.d2 + j) * dims_.d3 + t];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t t) const noexcept {
    return values_[(i * dims_.d2 + j) * dims_.d3 + t];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> fiber(std::size_t i, std::size_t j) noexcept {
    return {values_.data() + (i * dims_.d2 + j) * dims_.d3, dims_.d3};
  }
  std::span<const double> fiber(std::size_t i, std::size_t j) const noexcept {
    return {values_.data() + (i * dims_.d2 + j) * dims_.d3, dims_.d3};
  }

  bool all_finite() const noexcept;

  DenseTensor3& operator+=(const DenseTensor3& other);
  DenseTensor3& operator*=(double alpha) noexcept;

  friend bool operator==(const DenseTensor3&, const DenseTensor3&) = default;

 private:
  Dims3 dims_{};
  std::vector<double> values_;
};

DenseTensor3 operator+(DenseTensor3 a, const DenseTensor3& b);
DenseTensor3 operator-(const DenseTensor3& a, const DenseTensor3& b);
DenseTensor3 operator*(double alpha, DenseTensor3 a);

double max_abs_diff(const DenseTensor3& a, const DenseTensor3& b);
double frobenius_norm(const DenseTensor3& a);

// Dense row-major real matrix. Used for mixing matrices and their inverses.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<const double> values() const noexcept { return values_; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace msftgcn
