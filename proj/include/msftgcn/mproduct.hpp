#pragma once

#include <cstddef>
#include <memory>

#include "msftgcn/tensor.hpp"

namespace msftgcn {

// Invertible lower-triangular T x T matrix used to mix frontal slices along time.
// The inverse and both transposes are computed once at construction and shared
// between copies.
class MixingMatrix {
 public:
  // Checks lower-triangularity and a nonzero diagonal; throws NumericalError if singular.
  static MixingMatrix from_lower_triangular(Matrix entries);
  static MixingMatrix identity(std::size_t T);

  std::size_t T() const noexcept { return entries_->rows(); }
  // Number of slices (current one included) mixed into a transformed slice.
  std::size_t bandwidth() const noexcept { return bandwidth_; }

  const Matrix& entries() const noexcept { return *entries_; }
  const Matrix& inverse() const noexcept { return *inverse_; }
  const Matrix& entries_transposed() const noexcept { return *entries_t_; }
  const Matrix& inverse_transposed() const noexcept { return *inverse_t_; }

  std::shared_ptr<const Matrix> shared_entries() const noexcept { return entries_; }
  std::shared_ptr<const Matrix> shared_inverse() const noexcept { return inverse_; }
  std::shared_ptr<const Matrix> shared_entries_transposed() const noexcept { return entries_t_; }
  std::shared_ptr<const Matrix> shared_inverse_transposed() const noexcept { return inverse_t_; }

 private:
  MixingMatrix() = default;

  std::shared_ptr<const Matrix> entries_;
  std::shared_ptr<const Matrix> inverse_;
  std::shared_ptr<const Matrix> entries_t_;
  std::shared_ptr<const Matrix> inverse_t_;
  std::size_t bandwidth_ = 1;
};

// Banded averaging matrix: row t (1-based) holds 1/min(b, t) on columns
// max(1, t-b+1)..t and zeros elsewhere. Requires 1 <= b <= T.
MixingMatrix banded_m(std::size_t T, std::size_t b);

// Solves L X = I by forward substitution. Throws NumericalError on a zero pivot.
Matrix lower_triangular_inverse(const Matrix& lower);

// Mode-3 product: result(i, j, t) = sum_k m(t, k) * a(i, j, k).
// Zero entries of m are skipped, so a banded m costs O(d1*d2*T*b).
DenseTensor3 m_transform(const DenseTensor3& a, const Matrix& m);
DenseTensor3 m_transform(const DenseTensor3& a, const MixingMatrix& m);
DenseTensor3 m_transform_inverse(const DenseTensor3& a, const MixingMatrix& m);

// Slice-by-slice matrix product: result(:, :, t) = a(:, :, t) * b(:, :, t).
DenseTensor3 facewise_product(const DenseTensor3& a, const DenseTensor3& b);

// M-product: ((a x3 M) facewise (b x3 M)) x3 M^-1.
DenseTensor3 m_product(const DenseTensor3& a, const DenseTensor3& b, const MixingMatrix& m);

}  // namespace msftgcn
