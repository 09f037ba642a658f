#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "msftgcn/rng.hpp"
#include "msftgcn/tensor.hpp"

namespace testing {

inline msftgcn::DenseTensor3 random_tensor(msftgcn::Dims3 dims, msftgcn::Rng& rng,
                                           double lo = -1.0, double hi = 1.0) {
  msftgcn::DenseTensor3 t(dims);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline std::size_t pick(msftgcn::Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Dense T x T matrix as nested vectors, 0-based.
using DenseM = std::vector<std::vector<double>>;

// Straight triple-loop mode-3 product with every coefficient visited.
inline msftgcn::DenseTensor3 naive_mode3(const msftgcn::DenseTensor3& a, const DenseM& m) {
  const auto d = a.dims();
  msftgcn::DenseTensor3 out(d);
  for (std::size_t i = 0; i < d.d1; ++i)
    for (std::size_t j = 0; j < d.d2; ++j)
      for (std::size_t t = 0; t < d.d3; ++t) {
        double s = 0.0;
        for (std::size_t k = 0; k < d.d3; ++k) s += m[t][k] * a(i, j, k);
        out(i, j, t) = s;
      }
  return out;
}

inline msftgcn::DenseTensor3 naive_facewise(const msftgcn::DenseTensor3& a,
                                            const msftgcn::DenseTensor3& b) {
  const auto da = a.dims();
  const auto db = b.dims();
  msftgcn::DenseTensor3 out({da.d1, db.d2, da.d3});
  for (std::size_t t = 0; t < da.d3; ++t)
    for (std::size_t i = 0; i < da.d1; ++i)
      for (std::size_t j = 0; j < db.d2; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < da.d2; ++k) s += a(i, k, t) * b(k, j, t);
        out(i, j, t) = s;
      }
  return out;
}

// Entry rule written out from the definition, 1-based t and k.
inline DenseM banded_oracle(std::size_t T, std::size_t b) {
  DenseM m(T, std::vector<double>(T, 0.0));
  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t lo = t >= b ? t - b + 1 : 1;
    for (std::size_t k = lo; k <= t; ++k) m[t - 1][k - 1] = 1.0 / static_cast<double>(std::min(b, t));
  }
  return m;
}

// Gauss-Jordan with partial pivoting, independent of the library's forward substitution.
inline DenseM gauss_jordan_inverse(DenseM a) {
  const std::size_t n = a.size();
  DenseM inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    const double piv = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

inline DenseM to_dense(const msftgcn::Matrix& m) {
  DenseM out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

}  // namespace testing
