#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msftgcn/tensor.hpp"

namespace msftgcn {

double mae(std::span<const double> pred, std::span<const double> obs);
double rmse(std::span<const double> pred, std::span<const double> obs);

// rmse >= mae >= 0 and n >= 1 are checked on construction.
class MetricReport {
 public:
  MetricReport(std::size_t horizon_steps, double mae, double rmse, std::size_t n);

  std::size_t horizon_steps() const noexcept { return horizon_steps_; }
  double mae() const noexcept { return mae_; }
  double rmse() const noexcept { return rmse_; }
  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t horizon_steps_;
  double mae_;
  double rmse_;
  std::size_t n_;
};

// Per-step metrics over N x F x T_p predictions (already de-normalized).
struct HorizonMetrics {
  std::vector<MetricReport> per_step;       // step s = 1..T_p
  MetricReport window;                      // all steps pooled, horizon_steps = T_p
  std::vector<MetricReport> quarter_marks;  // steps T_p/4, T_p/2, 3T_p/4, T_p when T_p % 4 == 0
};

HorizonMetrics horizon_metrics(std::span<const DenseTensor3> predictions,
                               std::span<const DenseTensor3> targets);

}  // namespace msftgcn
