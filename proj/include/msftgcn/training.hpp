#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msftgcn/data.hpp"
#include "msftgcn/model.hpp"

namespace msftgcn {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  std::uint64_t seed = 7;
  std::size_t patience = 10;  // 0 disables early stopping
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // 0 disables clipping

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;     // 1-based
  double train_loss = 0.0;   // MSE over all training batches after the epoch's updates
  double val_mae = 0.0;      // de-normalized
};

struct TrainReport {
  double initial_train_loss = 0.0;
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;
  double best_val_mae = 0.0;
  bool stopped_early = false;
  double wall_seconds = 0.0;
};

struct TrainingSet {
  const ModelContext* context = nullptr;
  std::vector<SegmentBatch> train;
  std::vector<SegmentBatch> val;
  std::vector<double> mean;  // per-feature, for de-normalizing val predictions
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

double mse_loss(const DenseTensor3& pred, const DenseTensor3& target);

// Mean per-batch MSE in normalized units.
double dataset_loss(const ModelContext& context, const ModelParams& params,
                    std::span<const SegmentBatch> batches);

std::vector<DenseTensor3> predict_denormalized(const ModelContext& context,
                                               const ModelParams& params,
                                               std::span<const SegmentBatch> batches,
                                               std::span<const double> mean);

// MAE of de-normalized predictions against de-normalized targets.
double denormalized_mae(const ModelContext& context, const ModelParams& params,
                        std::span<const SegmentBatch> batches, std::span<const double> mean);

// Scales the gradient to global norm max_norm when it is larger; returns the pre-clip norm.
double clip_global_norm(ModelParams& gradient, double max_norm);

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const ModelParams& shape);
  void step(ModelParams& params, const ModelParams& gradient);

 private:
  TrainConfig config_;
  ModelParams m_;
  ModelParams v_;
  std::size_t t_ = 0;
};

// Mini-batch training with per-epoch validation and best-epoch restore.
// Throws NumericalError on a NaN loss or when the train loss exceeds 1e6x its initial value.
TrainResult train(ModelParams initial, const TrainingSet& data, const TrainConfig& config);

// Phase-mean baseline: each target step predicts the training-range mean of
// the same node, feature and phase (index mod q). `raw_cube` is time-major.
std::vector<DenseTensor3> historical_average_baseline(const DenseTensor3& raw_cube,
                                                      TimeRange train, std::size_t q,
                                                      std::span<const std::size_t> anchors,
                                                      std::size_t T_p,
                                                      std::size_t out_features = 1);

}  // namespace msftgcn
