#include "msftgcn/mproduct.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "msftgcn/error.hpp"

namespace msftgcn {
namespace {

struct RowSupport {
  std::size_t lo = 0;  // first nonzero column
  std::size_t hi = 0;  // one past the last nonzero column; lo == hi for an all-zero row
};

std::vector<RowSupport> row_supports(const Matrix& m) {
  std::vector<RowSupport> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t lo = m.cols();
    std::size_t hi = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) {
        lo = std::min(lo, c);
        hi = c + 1;
      }
    }
    out[r] = lo < hi ? RowSupport{lo, hi} : RowSupport{0, 0};
  }
  return out;
}

std::size_t lower_bandwidth(const Matrix& m) {
  std::size_t b = 1;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c <= r; ++c)
      if (m(r, c) != 0.0) b = std::max(b, r - c + 1);
  return b;
}

}  // namespace

Matrix lower_triangular_inverse(const Matrix& lower) {
  const std::size_t n = lower.rows();
  if (lower.cols() != n) throw ShapeError("inverse of a non-square matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (lower(i, i) == 0.0 || !std::isfinite(lower(i, i))) {
      throw NumericalError("mixing matrix is singular: zero pivot at row " + std::to_string(i + 1));
    }
  }
  // Column c of the inverse solves L x = e_c; x is zero above row c.
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = c; r < n; ++r) {
      double rhs = (r == c) ? 1.0 : 0.0;
      for (std::size_t k = c; k < r; ++k) rhs -= lower(r, k) * inv(k, c);
      inv(r, c) = rhs / lower(r, r);
    }
  }
  return inv;
}

MixingMatrix MixingMatrix::from_lower_triangular(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw ShapeError("mixing matrix must be square and non-empty");
  }
  for (std::size_t r = 0; r < entries.rows(); ++r)
    for (std::size_t c = r + 1; c < entries.cols(); ++c)
      if (entries(r, c) != 0.0) {
        throw ParameterError("mixing matrix must be lower triangular; entry (" +
                             std::to_string(r + 1) + "," + std::to_string(c + 1) +
                             ") is nonzero");
      }
  MixingMatrix m;
  Matrix inverse = lower_triangular_inverse(entries);
  m.bandwidth_ = lower_bandwidth(entries);
  m.entries_t_ = std::make_shared<const Matrix>(entries.transposed());
  m.inverse_t_ = std::make_shared<const Matrix>(inverse.transposed());
  m.entries_ = std::make_shared<const Matrix>(std::move(entries));
  m.inverse_ = std::make_shared<const Matrix>(std::move(inverse));
  return m;
}

MixingMatrix MixingMatrix::identity(std::size_t T) { return banded_m(T, 1); }

MixingMatrix banded_m(std::size_t T, std::size_t b) {
  if (T == 0) throw ParameterError("mixing matrix needs T >= 1");
  if (b < 1 || b > T) {
    throw ParameterError("bandwidth b = " + std::to_string(b) + " outside the valid interval [1, " +
                         std::to_string(T) + "]");
  }
  Matrix m(T, T);
  // 1-based t, k in the formula; row r = t-1, column c = k-1.
  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t width = std::min(b, t);
    const std::size_t first = (t >= b) ? t - b + 1 : 1;
    for (std::size_t k = first; k <= t; ++k) m(t - 1, k - 1) = 1.0 / static_cast<double>(width);
  }
  return MixingMatrix::from_lower_triangular(std::move(m));
}

DenseTensor3 m_transform(const DenseTensor3& a, const Matrix& m) {
  const Dims3 d = a.dims();
  if (m.rows() != d.d3 || m.cols() != d.d3) {
    throw ShapeError("m_transform: tensor " + to_string(d) + " against matrix " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const auto support = row_supports(m);
  DenseTensor3 out(d);
  for (std::size_t i = 0; i < d.d1; ++i) {
    for (std::size_t j = 0; j < d.d2; ++j) {
      auto src = a.fiber(i, j);
      auto dst = out.fiber(i, j);
      for (std::size_t t = 0; t < d.d3; ++t) {
        double acc = 0.0;
        for (std::size_t k = support[t].lo; k < support[t].hi; ++k) {
          const double coeff = m(t, k);
          if (coeff != 0.0) acc += coeff * src[k];
        }
        dst[t] = acc;
      }
    }
  }
  return out;
}

DenseTensor3 m_transform(const DenseTensor3& a, const MixingMatrix& m) {
  return m_transform(a, m.entries());
}

DenseTensor3 m_transform_inverse(const DenseTensor3& a, const MixingMatrix& m) {
  return m_transform(a, m.inverse());
}

DenseTensor3 facewise_product(const DenseTensor3& a, const DenseTensor3& b) {
  const Dims3 da = a.dims();
  const Dims3 db = b.dims();
  if (da.d2 != db.d1 || da.d3 != db.d3) {
    throw ShapeError("facewise_product: incompatible dims " + to_string(da) + " and " +
                     to_string(db));
  }
  DenseTensor3 out({da.d1, db.d2, da.d3});
  for (std::size_t i = 0; i < da.d1; ++i)
    for (std::size_t k = 0; k < da.d2; ++k)
      for (std::size_t j = 0; j < db.d2; ++j)
        for (std::size_t t = 0; t < da.d3; ++t) out(i, j, t) += a(i, k, t) * b(k, j, t);
  return out;
}

DenseTensor3 m_product(const DenseTensor3& a, const DenseTensor3& b, const MixingMatrix& m) {
  if (a.dims().d3 != m.T() || b.dims().d3 != m.T()) {
    throw ShapeError("m_product: operands " + to_string(a.dims()) + " and " + to_string(b.dims()) +
                     " against T = " + std::to_string(m.T()));
  }
  return m_transform_inverse(facewise_product(m_transform(a, m), m_transform(b, m)), m);
}

}  // namespace msftgcn
