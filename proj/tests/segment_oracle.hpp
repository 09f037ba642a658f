#pragma once

#include <cstddef>
#include <vector>

namespace testing {

struct OracleSegments {
  std::vector<long> hourly, daily, weekly, target;
};

// 1-based indices written directly from the window formulas.
inline OracleSegments segment_oracle(long q, long T_p, long T_h, long T_d, long T_w, long t0) {
  OracleSegments o;
  for (long k = t0 - T_h + 1; k <= t0; ++k) o.hourly.push_back(k);
  for (long d = T_d / T_p; d >= 1; --d)
    for (long k = t0 - q * d + 1; k <= t0 - q * d + T_p; ++k) o.daily.push_back(k);
  for (long w = T_w / T_p; w >= 1; --w)
    for (long k = t0 - 7 * q * w + 1; k <= t0 - 7 * q * w + T_p; ++k) o.weekly.push_back(k);
  for (long k = t0 + 1; k <= t0 + T_p; ++k) o.target.push_back(k);
  return o;
}

template <class A, class B>
bool same_indices(const A& a, const B& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (static_cast<long>(a[k]) != static_cast<long>(b[k])) return false;
  return true;
}

}  // namespace testing
