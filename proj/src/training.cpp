#include "msftgcn/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "msftgcn/error.hpp"
#include "msftgcn/rng.hpp"

namespace msftgcn {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience > epochs) {
    throw ConfigError("patience " + std::to_string(patience) + " exceeds epochs " +
                      std::to_string(epochs));
  }
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (optimizer == OptimizerKind::adam &&
      (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || !(eps > 0.0))) {
    throw ConfigError("adam needs beta1, beta2 in [0, 1) and eps > 0");
  }
}

double mse_loss(const DenseTensor3& pred, const DenseTensor3& target) {
  if (pred.dims() != target.dims()) {
    throw ShapeError("mse_loss: dims " + to_string(pred.dims()) + " and " +
                     to_string(target.dims()));
  }
  if (pred.size() == 0) throw ShapeError("mse_loss: empty tensors");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double e = pred.values()[k] - target.values()[k];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

double dataset_loss(const ModelContext& context, const ModelParams& params,
                    std::span<const SegmentBatch> batches) {
  if (batches.empty()) throw ConfigError("dataset_loss over an empty batch set");
  double sum = 0.0;
  for (const auto& b : batches) sum += mse_loss(model_forward(b, context, params), b.target);
  return sum / static_cast<double>(batches.size());
}

std::vector<DenseTensor3> predict_denormalized(const ModelContext& context,
                                               const ModelParams& params,
                                               std::span<const SegmentBatch> batches,
                                               std::span<const double> mean) {
  std::vector<DenseTensor3> out;
  out.reserve(batches.size());
  for (const auto& b : batches) {
    out.push_back(denormalize_segment(model_forward(b, context, params), mean));
  }
  return out;
}

double denormalized_mae(const ModelContext& context, const ModelParams& params,
                        std::span<const SegmentBatch> batches, std::span<const double> mean) {
  if (batches.empty()) throw ConfigError("denormalized_mae over an empty batch set");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& b : batches) {
    const DenseTensor3 pred = denormalize_segment(model_forward(b, context, params), mean);
    const DenseTensor3 obs = denormalize_segment(b.target, mean);
    for (std::size_t k = 0; k < pred.size(); ++k) {
      sum += std::abs(pred.values()[k] - obs.values()[k]);
    }
    n += pred.size();
  }
  return sum / static_cast<double>(n);
}

double clip_global_norm(ModelParams& gradient, double max_norm) {
  double sq = 0.0;
  for (const DenseTensor3* g : std::as_const(gradient).tensors())
    for (double v : g->values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (DenseTensor3* g : gradient.tensors()) *g *= scale;
  }
  return norm;
}

Optimizer::Optimizer(const TrainConfig& config, const ModelParams& shape)
    : config_(config), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void Optimizer::step(ModelParams& params, const ModelParams& gradient) {
  auto p = params.tensors();
  auto g = gradient.tensors();
  if (config_.optimizer == OptimizerKind::sgd) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto pv = p[k]->values();
      auto gv = g[k]->values();
      for (std::size_t i = 0; i < pv.size(); ++i) pv[i] -= config_.lr * gv[i];
    }
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pv = p[k]->values();
    auto gv = g[k]->values();
    auto mv = m[k]->values();
    auto vv = v[k]->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = config_.beta1 * mv[i] + (1.0 - config_.beta1) * gv[i];
      vv[i] = config_.beta2 * vv[i] + (1.0 - config_.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / c1;
      const double v_hat = vv[i] / c2;
      pv[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

TrainResult train(ModelParams initial, const TrainingSet& data, const TrainConfig& config) {
  config.validate();
  if (data.context == nullptr) throw ContractError("training set has no model context");
  if (data.train.empty()) throw ConfigError("no training batches");
  const auto start = std::chrono::steady_clock::now();
  const ModelContext& ctx = *data.context;

  TrainResult result{std::move(initial), {}};
  TrainReport& report = result.report;
  report.initial_train_loss = dataset_loss(ctx, result.params, data.train);
  if (config.epochs == 0) return result;
  if (data.val.empty()) throw ConfigError("no validation batches");

  ModelParams& params = result.params;
  ModelParams best = params;
  Optimizer optimizer(config, params);
  Rng rng(config.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      ModelParams total = zeros_like(params);
      ModelParams grad;
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        batch_loss += loss_and_gradient(data.train[order[k]], ctx, params, &grad);
        auto dst = total.tensors();
        auto src = std::as_const(grad).tensors();
        for (std::size_t t = 0; t < dst.size(); ++t) *dst[t] += *src[t];
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("NaN loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
      }
      for (DenseTensor3* t : total.tensors()) *t *= 1.0 / static_cast<double>(end - begin);
      clip_global_norm(total, config.clip_norm);
      optimizer.step(params, total);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = dataset_loss(ctx, params, data.train);
    if (!std::isfinite(rec.train_loss) || rec.train_loss > 1e6 * report.initial_train_loss) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           ": train loss " + std::to_string(rec.train_loss) + " vs initial " +
                           std::to_string(report.initial_train_loss));
    }
    rec.val_mae = denormalized_mae(ctx, params, data.val, data.mean);
    report.epochs.push_back(rec);
    if (!report.best_epoch || rec.val_mae < report.best_val_mae) {
      report.best_epoch = epoch;
      report.best_val_mae = rec.val_mae;
      best = params;
    }
    if (config.patience > 0 && epoch - *report.best_epoch >= config.patience) {
      report.stopped_early = epoch < config.epochs;
      break;
    }
  }
  params = std::move(best);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<DenseTensor3> historical_average_baseline(const DenseTensor3& raw_cube,
                                                      TimeRange train, std::size_t q,
                                                      std::span<const std::size_t> anchors,
                                                      std::size_t T_p,
                                                      std::size_t out_features) {
  const Dims3 d = raw_cube.dims();
  if (q < 1) throw ConfigError("q must be >= 1");
  if (train.first < 1 || train.last > d.d1 || train.size() == 0) {
    throw RangeError("baseline training range outside the cube");
  }
  if (out_features < 1 || out_features > d.d3) throw ConfigError("out_features out of range");
  // phase_sum(phase, node, feature)
  DenseTensor3 phase_sum({q, d.d2, out_features});
  std::vector<std::size_t> phase_count(q, 0);
  for (std::size_t t = train.first; t <= train.last; ++t) {
    const std::size_t phase = (t - 1) % q;
    ++phase_count[phase];
    for (std::size_t n = 0; n < d.d2; ++n)
      for (std::size_t f = 0; f < out_features; ++f) phase_sum(phase, n, f) += raw_cube(t - 1, n, f);
  }
  std::vector<DenseTensor3> out;
  out.reserve(anchors.size());
  for (std::size_t t0 : anchors) {
    if (t0 + T_p > d.d1) throw RangeError("baseline anchor " + std::to_string(t0) + " too late");
    DenseTensor3 pred({d.d2, out_features, T_p});
    for (std::size_t s = 0; s < T_p; ++s) {
      const std::size_t phase = (t0 + s) % q;  // target index t0+1+s, 1-based
      if (phase_count[phase] == 0) {
        throw DataError("phase " + std::to_string(phase) + " never observed in the training range");
      }
      for (std::size_t n = 0; n < d.d2; ++n)
        for (std::size_t f = 0; f < out_features; ++f) {
          pred(n, f, s) = phase_sum(phase, n, f) / static_cast<double>(phase_count[phase]);
        }
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace msftgcn
