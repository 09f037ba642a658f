#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "msftgcn/config.hpp"
#include "msftgcn/data.hpp"
#include "msftgcn/metrics.hpp"
#include "msftgcn/model.hpp"
#include "msftgcn/training.hpp"

namespace msftgcn {

// Data loaded, preprocessed, split and cut into segment batches.
struct PreparedExperiment {
  ExperimentConfig config;
  DenseTensor3 raw_cube;   // after interpolation, before normalization (time-major)
  TrafficDataset dataset;  // normalized cube plus the training mean
  GraphTopology graph;     // edge weights as fed to the normalization
  Split split;
  std::vector<std::size_t> train_anchors;
  std::vector<std::size_t> val_anchors;
  std::vector<std::size_t> test_anchors;
  ModelContext context;
  std::vector<SegmentBatch> train;
  std::vector<SegmentBatch> val;
  std::vector<SegmentBatch> test;
  std::vector<DenseTensor3> test_targets_raw;  // observed values, N x F_out x T_p
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config);

ModelParams initial_params(const PreparedExperiment& experiment);
TrainResult run_training(const PreparedExperiment& experiment);

// Test-set metrics with predictions de-normalized against the observed targets.
HorizonMetrics evaluate_test(const PreparedExperiment& experiment, const ModelParams& params);
HorizonMetrics evaluate_baseline(const PreparedExperiment& experiment);

struct SweepEntry {
  std::size_t bandwidth = 1;
  double mae = 0.0;
  double rmse = 0.0;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  std::size_t best_b_mae = 0;
  std::size_t best_b_rmse = 0;
};

// One training per bandwidth with every other setting fixed. Rejects duplicate
// or out-of-range bandwidths with ConfigError.
SweepReport sweep_bandwidth(const ExperimentConfig& config, std::span<const std::size_t> bandwidths);

nlohmann::json to_json(const MetricReport& m);
nlohmann::json to_json(const HorizonMetrics& h);
nlohmann::json to_json(const SweepReport& s);
nlohmann::json to_json(const EpochRecord& e);

}  // namespace msftgcn
