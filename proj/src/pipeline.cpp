#include "msftgcn/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "msftgcn/error.hpp"
#include "msftgcn/tns1.hpp"

namespace msftgcn {

using nlohmann::json;

namespace {

struct RawData {
  DenseTensor3 cube;
  GraphTopology graph;
};

RawData load_raw(const ExperimentConfig& config) {
  if (config.data.kind == DataSource::Kind::synthetic) {
    SyntheticOptions opts = config.data.synthetic;
    opts.q = config.segments.q;
    SyntheticData s = generate_synthetic(opts);
    return {std::move(s.dataset.cube), std::move(s.graph)};
  }
  DenseTensor3 cube = read_tns1(config.data.cube);
  const std::size_t nodes = config.data.nodes.value_or(cube.dims().d2);
  if (nodes != cube.dims().d2) {
    throw ConfigError("cube has " + std::to_string(cube.dims().d2) + " nodes, config says " +
                      std::to_string(nodes));
  }
  GraphTopology graph = load_adjacency_csv(config.data.adjacency, nodes);
  if (!config.data.mask.empty()) {
    const DenseTensor3 mask_tensor = read_tns1(config.data.mask);
    if (mask_tensor.dims() != cube.dims()) {
      throw ShapeError("missing mask dims " + to_string(mask_tensor.dims()) + " differ from cube " +
                       to_string(cube.dims()));
    }
    std::vector<std::uint8_t> mask(cube.size());
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = mask_tensor.values()[k] != 0.0;
    cube = interpolate_missing(cube, mask);
  }
  return {std::move(cube), std::move(graph)};
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  RawData raw = load_raw(config);
  const std::size_t steps = raw.cube.dims().d1;
  const Split split = chronological_split(steps, config.split);
  NormalizedCube normalized = zero_mean_normalize(raw.cube, split.train);

  ModelConfig mc = config.model;
  mc.nodes = raw.cube.dims().d2;
  mc.in_features = raw.cube.dims().d3;
  GraphTopology graph = config.gaussian_kernel ? distance_to_affinity(raw.graph) : raw.graph;
  ModelContext context = make_context(mc, graph);

  const SegmentSpec& spec = config.segments;
  PreparedExperiment e{
      .config = config,
      .raw_cube = std::move(raw.cube),
      .dataset = TrafficDataset{std::move(normalized.cube), spec.q, std::move(normalized.mean), {}},
      .graph = std::move(graph),
      .split = split,
      .train_anchors = anchors_in(split.train, spec, steps),
      .val_anchors = anchors_in(split.val, spec, steps),
      .test_anchors = anchors_in(split.test, spec, steps),
      .context = std::move(context),
      .train = {},
      .val = {},
      .test = {},
      .test_targets_raw = {},
  };
  e.config.model = mc;
  const std::size_t f_out = mc.out_features;
  for (std::size_t t0 : e.train_anchors) {
    e.train.push_back(extract_segments(e.dataset.cube, t0, spec, f_out));
  }
  for (std::size_t t0 : e.val_anchors) {
    e.val.push_back(extract_segments(e.dataset.cube, t0, spec, f_out));
  }
  for (std::size_t t0 : e.test_anchors) {
    e.test.push_back(extract_segments(e.dataset.cube, t0, spec, f_out));
    e.test_targets_raw.push_back(extract_segments(e.raw_cube, t0, spec, f_out).target);
  }
  return e;
}

ModelParams initial_params(const PreparedExperiment& experiment) {
  return init_params(experiment.context.config, experiment.config.train.seed);
}

TrainResult run_training(const PreparedExperiment& experiment) {
  TrainingSet data{&experiment.context, experiment.train, experiment.val, experiment.dataset.mean};
  return train(initial_params(experiment), data, experiment.config.train);
}

HorizonMetrics evaluate_test(const PreparedExperiment& experiment, const ModelParams& params) {
  const auto preds =
      predict_denormalized(experiment.context, params, experiment.test, experiment.dataset.mean);
  return horizon_metrics(preds, experiment.test_targets_raw);
}

HorizonMetrics evaluate_baseline(const PreparedExperiment& experiment) {
  const auto preds = historical_average_baseline(
      experiment.raw_cube, experiment.split.train, experiment.config.segments.q,
      experiment.test_anchors, experiment.config.segments.T_p,
      experiment.context.config.out_features);
  return horizon_metrics(preds, experiment.test_targets_raw);
}

SweepReport sweep_bandwidth(const ExperimentConfig& config,
                            std::span<const std::size_t> bandwidths) {
  if (bandwidths.empty()) throw ConfigError("bandwidth sweep needs at least one value");
  std::set<std::size_t> seen;
  const std::size_t shortest = std::min({config.model.T_h, config.model.T_d, config.model.T_w});
  for (std::size_t b : bandwidths) {
    if (!seen.insert(b).second) {
      throw ConfigError("bandwidth " + std::to_string(b) + " requested twice");
    }
    if (b < 1 || b > shortest) {
      throw ConfigError("bandwidth " + std::to_string(b) + " outside the valid interval [1, " +
                        std::to_string(shortest) + "]");
    }
  }
  const auto run_one = [&config](std::size_t b) {
    ExperimentConfig c = config;
    c.model.bandwidth = b;
    const PreparedExperiment e = prepare_experiment(c);
    const TrainResult r = run_training(e);
    const HorizonMetrics m = evaluate_test(e, r.params);
    return SweepEntry{b, m.window.mae(), m.window.rmse()};
  };
  SweepReport report;
  if (config.sweep_parallel) {
    std::vector<std::future<SweepEntry>> jobs;
    for (std::size_t b : bandwidths) jobs.push_back(std::async(std::launch::async, run_one, b));
    for (auto& j : jobs) report.entries.push_back(j.get());
  } else {
    for (std::size_t b : bandwidths) report.entries.push_back(run_one(b));
  }
  const auto best = [&](auto metric) {
    return std::min_element(report.entries.begin(), report.entries.end(),
                            [&](const SweepEntry& a, const SweepEntry& b) {
                              return metric(a) < metric(b);
                            })
        ->bandwidth;
  };
  report.best_b_mae = best([](const SweepEntry& e) { return e.mae; });
  report.best_b_rmse = best([](const SweepEntry& e) { return e.rmse; });
  return report;
}

json to_json(const MetricReport& m) {
  return {{"horizon_steps", m.horizon_steps()}, {"mae", m.mae()}, {"rmse", m.rmse()},
          {"n", m.n()}};
}

json to_json(const HorizonMetrics& h) {
  json steps = json::array();
  for (const auto& m : h.per_step) steps.push_back(to_json(m));
  json marks = json::array();
  for (const auto& m : h.quarter_marks) marks.push_back(to_json(m));
  return {{"per_step", steps}, {"window", to_json(h.window)}, {"quarter_marks", marks}};
}

json to_json(const SweepReport& s) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"b", e.bandwidth}, {"mae", e.mae}, {"rmse", e.rmse}});
  }
  return {{"entries", entries}, {"best_b_mae", s.best_b_mae}, {"best_b_rmse", s.best_b_rmse}};
}

json to_json(const EpochRecord& e) {
  return {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mae", e.val_mae}};
}

}  // namespace msftgcn
