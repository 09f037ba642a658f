#include "msftgcn/metrics.hpp"

#include <cmath>
#include <string>

#include "msftgcn/error.hpp"

namespace msftgcn {
namespace {

void check_lengths(std::span<const double> pred, std::span<const double> obs) {
  if (pred.size() != obs.size()) {
    throw ShapeError("metric inputs differ in length: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(obs.size()));
  }
  if (pred.empty()) throw ShapeError("metric inputs are empty");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> obs) {
  check_lengths(pred, obs);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - obs[i]);
  return sum / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> obs) {
  check_lengths(pred, obs);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - obs[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

MetricReport::MetricReport(std::size_t horizon_steps, double mae, double rmse, std::size_t n)
    : horizon_steps_(horizon_steps), mae_(mae), rmse_(rmse), n_(n) {
  if (n_ < 1) throw ContractError("metric report needs n >= 1");
  if (!(mae_ >= 0.0)) throw ContractError("metric report has negative or NaN MAE");
  // Equal absolute errors give rmse == mae up to rounding.
  if (rmse_ < mae_ * (1.0 - 1e-12)) {
    throw ContractError("metric report violates rmse >= mae: rmse " + std::to_string(rmse_) +
                        ", mae " + std::to_string(mae_));
  }
}

HorizonMetrics horizon_metrics(std::span<const DenseTensor3> predictions,
                               std::span<const DenseTensor3> targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw ShapeError("horizon_metrics needs equally many (>= 1) predictions and targets");
  }
  const Dims3 d = predictions[0].dims();
  const std::size_t steps = d.d3;
  std::vector<std::vector<double>> pred(steps), obs(steps);
  std::vector<double> all_pred, all_obs;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    if (predictions[k].dims() != d || targets[k].dims() != d) {
      throw ShapeError("prediction/target dims differ: " + to_string(predictions[k].dims()) +
                       " vs " + to_string(targets[k].dims()));
    }
    for (std::size_t i = 0; i < d.d1; ++i)
      for (std::size_t j = 0; j < d.d2; ++j)
        for (std::size_t s = 0; s < steps; ++s) {
          pred[s].push_back(predictions[k](i, j, s));
          obs[s].push_back(targets[k](i, j, s));
          all_pred.push_back(predictions[k](i, j, s));
          all_obs.push_back(targets[k](i, j, s));
        }
  }
  std::vector<MetricReport> per_step;
  for (std::size_t s = 0; s < steps; ++s) {
    per_step.emplace_back(s + 1, mae(pred[s], obs[s]), rmse(pred[s], obs[s]), pred[s].size());
  }
  MetricReport window(steps, mae(all_pred, all_obs), rmse(all_pred, all_obs), all_pred.size());
  std::vector<MetricReport> marks;
  if (steps % 4 == 0) {
    for (std::size_t k = 1; k <= 4; ++k) marks.push_back(per_step[k * steps / 4 - 1]);
  }
  return {std::move(per_step), window, std::move(marks)};
}

}  // namespace msftgcn
