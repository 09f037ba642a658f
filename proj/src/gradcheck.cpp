#include "msftgcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "msftgcn/error.hpp"
#include "msftgcn/rng.hpp"

namespace msftgcn {

GradCheckReport finite_diff_check(std::string op_name, const DifferentiableFn& f,
                                  const DenseTensor3& x, double h, int probes, double tolerance,
                                  std::uint64_t seed) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_check: step h must be positive");
  if (probes < 1) throw ParameterError("finite_diff_check: probes must be >= 1");

  GradCheckReport report;
  report.op_name = std::move(op_name);
  report.tolerance = tolerance;
  report.probe_count = probes;
  if (x.size() == 0) {
    report.pass = true;
    return report;
  }

  DenseTensor3 analytic(x.dims());
  f(x, &analytic);

  Rng rng(seed);
  DenseTensor3 probe = x;
  for (int p = 0; p < probes; ++p) {
    const std::size_t k = rng.below(x.size());
    const double original = x.values()[k];
    probe.values()[k] = original + h;
    const double up = f(probe, nullptr);
    probe.values()[k] = original - h;
    const double down = f(probe, nullptr);
    probe.values()[k] = original;

    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.values()[k];
    double rel = std::abs(a - numeric) / std::max(1e-12, std::abs(a) + std::abs(numeric));
    if (!std::isfinite(rel)) rel = INFINITY;
    report.max_relative_error = std::max(report.max_relative_error, rel);
  }
  report.pass = report.max_relative_error < tolerance;
  return report;
}

}  // namespace msftgcn
