#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "msftgcn/tensor.hpp"

namespace msftgcn {

struct GradCheckReport {
  std::string op_name;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int probe_count = 0;
};

// Scalar function of one tensor. When grad_out is non-null the function also
// writes the analytic gradient (same dims as x) into it.
using DifferentiableFn = std::function<double(const DenseTensor3& x, DenseTensor3* grad_out)>;

// Compares the analytic gradient of f at x with central differences
// (f(x + h e) - f(x - h e)) / 2h on `probes` coordinates drawn from `seed`.
// Relative error per probe: |a - n| / max(1e-12, |a| + |n|).
GradCheckReport finite_diff_check(std::string op_name, const DifferentiableFn& f,
                                  const DenseTensor3& x, double h, int probes, double tolerance,
                                  std::uint64_t seed = 1);

}  // namespace msftgcn
