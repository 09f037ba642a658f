#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "msftgcn/config.hpp"
#include "msftgcn/error.hpp"
#include "msftgcn/pipeline.hpp"
#include "support.hpp"

using namespace msftgcn;

namespace {

double params_distance(const ModelParams& a, const ModelParams& b) {
  double s = 0.0;
  const auto x = a.tensors(), y = b.tensors();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double n = frobenius_norm(*x[k] - *y[k]);
    s += n * n;
  }
  return std::sqrt(s);
}

double params_norm(const ModelParams& a) { return params_distance(a, zeros_like(a)); }

bool params_equal(const ModelParams& a, const ModelParams& b) {
  const auto x = a.tensors(), y = b.tensors();
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!(*x[k] == *y[k])) return false;
  return true;
}

ExperimentConfig quick_config() {
  ExperimentConfig c = desk_config();
  c.train.epochs = 6;
  c.train.patience = 0;
  return c;
}

}  // namespace

TEST_CASE("mse loss") {
  CHECK(mse_loss(DenseTensor3({1, 1, 1}, 2.0), DenseTensor3({1, 1, 1})) == 4.0);
  CHECK(mse_loss(DenseTensor3({1, 1, 2}, std::vector<double>{1, 3}), DenseTensor3({1, 1, 2}, 1.0)) ==
        2.0);
  CHECK(mse_loss(DenseTensor3({2, 1, 1}, 5.0), DenseTensor3({2, 1, 1}, 5.0)) == 0.0);
  CHECK_THROWS_AS(mse_loss(DenseTensor3({2, 1, 1}), DenseTensor3({1, 1, 2})), ShapeError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.patience = 50;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.lr = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("zero epochs returns the initial parameters") {
  ExperimentConfig c = quick_config();
  c.train.epochs = 0;
  const PreparedExperiment e = prepare_experiment(c);
  const TrainResult r = run_training(e);
  CHECK(params_equal(r.params, initial_params(e)));
  CHECK(r.report.epochs.empty());
  CHECK_FALSE(r.report.best_epoch.has_value());
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  for (OptimizerKind kind : {OptimizerKind::adam, OptimizerKind::sgd}) {
    ExperimentConfig c = quick_config();
    c.train.lr = 0.0;
    c.train.epochs = 3;
    c.train.optimizer = kind;
    const PreparedExperiment e = prepare_experiment(c);
    const TrainResult r = run_training(e);
    CHECK(params_equal(r.params, initial_params(e)));
    CHECK(r.report.epochs.size() == 3);
  }
}

TEST_CASE("sgd step length is lr times the gradient norm") {
  const PreparedExperiment e = prepare_experiment(desk_config());
  const ModelParams p0 = initial_params(e);
  ModelParams grad;
  loss_and_gradient(e.train.front(), e.context, p0, &grad);
  for (double lr : {1e-2, 1e-5, 1e-9}) {
    TrainConfig c;
    c.optimizer = OptimizerKind::sgd;
    c.lr = lr;
    Optimizer opt(c, p0);
    ModelParams p = p0;
    opt.step(p, grad);
    CHECK(std::abs(params_distance(p, p0) - lr * params_norm(grad)) <= 1e-12);
  }
}

TEST_CASE("global norm clipping") {
  const PreparedExperiment e = prepare_experiment(desk_config());
  ModelParams g = zeros_like(initial_params(e));
  g.head(0, 0, 0) = 30.0;
  g.branches[0].projection(0, 0, 0) = 40.0;
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(50.0));
  CHECK(params_norm(g) == doctest::Approx(5.0));
  CHECK(g.head(0, 0, 0) == doctest::Approx(3.0));
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0));
  CHECK(params_norm(g) == doctest::Approx(5.0));
}

TEST_CASE("training is deterministic") {
  const PreparedExperiment e = prepare_experiment(quick_config());
  const TrainResult a = run_training(e);
  const TrainResult b = run_training(e);
  REQUIRE(a.report.epochs.size() == b.report.epochs.size());
  for (std::size_t k = 0; k < a.report.epochs.size(); ++k) {
    CHECK(std::abs(a.report.epochs[k].train_loss - b.report.epochs[k].train_loss) <= 1e-12);
    CHECK(std::abs(a.report.epochs[k].val_mae - b.report.epochs[k].val_mae) <= 1e-12);
  }
  CHECK(params_equal(a.params, b.params));
}

TEST_CASE("early stopping restores the best epoch") {
  ExperimentConfig c = desk_config();
  c.train.epochs = 60;
  c.train.patience = 3;
  const PreparedExperiment e = prepare_experiment(c);
  const TrainResult r = run_training(e);
  REQUIRE(r.report.best_epoch.has_value());
  const std::size_t best = *r.report.best_epoch;
  double min_val = INFINITY;
  for (const auto& rec : r.report.epochs) min_val = std::min(min_val, rec.val_mae);
  CHECK(r.report.best_val_mae == min_val);
  CHECK(r.report.epochs[best - 1].val_mae == min_val);
  if (r.report.stopped_early) CHECK(r.report.epochs.size() == best + c.train.patience);
  const double again = denormalized_mae(e.context, r.params, e.val, e.dataset.mean);
  CHECK(std::abs(again - r.report.best_val_mae) <= 1e-9);
}

TEST_CASE("divergence aborts with a numerical error") {
  ExperimentConfig c = quick_config();
  c.train.optimizer = OptimizerKind::sgd;
  c.train.lr = 1e8;
  c.train.clip_norm = 0.0;
  const PreparedExperiment e = prepare_experiment(c);
  CHECK_THROWS_AS(run_training(e), NumericalError);
}

TEST_CASE("historical average baseline") {
  const DenseTensor3 constant({40, 2, 1}, 7.5);
  const std::vector<std::size_t> anchors{20, 30};
  for (const auto& p : historical_average_baseline(constant, {1, 24}, 8, anchors, 4))
    for (double v : p.values()) CHECK(v == 7.5);

  DenseTensor3 periodic({48, 2, 1});
  for (std::size_t t = 0; t < 48; ++t)
    for (std::size_t i = 0; i < 2; ++i) periodic(t, i, 0) = 10.0 * i + static_cast<double>(t % 8);
  const auto preds = historical_average_baseline(periodic, {1, 24}, 8, anchors, 4);
  for (std::size_t a = 0; a < anchors.size(); ++a)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t s = 0; s < 4; ++s) CHECK(preds[a](i, 0, s) == periodic(anchors[a] + s, i, 0));

  CHECK_THROWS_AS(historical_average_baseline(constant, {1, 3}, 8, anchors, 4), DataError);
}

TEST_CASE("baseline matches a phase-bucket oracle on synthetic data") {
  const PreparedExperiment e = prepare_experiment(desk_config());
  const std::size_t q = e.config.segments.q;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, int>> bucket;
  for (std::size_t t = e.split.train.first; t <= e.split.train.last; ++t)
    for (std::size_t i = 0; i < 4; ++i) {
      auto& b = bucket[{t % q, i}];
      b.first += e.raw_cube(t - 1, i, 0);
      b.second += 1;
    }
  const auto preds = historical_average_baseline(e.raw_cube, e.split.train, q, e.test_anchors, 4);
  double abs_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t a = 0; a < e.test_anchors.size(); ++a)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t s = 0; s < 4; ++s) {
        const std::size_t t = e.test_anchors[a] + 1 + s;
        const auto& b = bucket[{t % q, i}];
        const double want = b.first / b.second;
        CHECK(preds[a](i, 0, s) == doctest::Approx(want).epsilon(1e-14));
        abs_sum += std::abs(want - e.raw_cube(t - 1, i, 0));
        ++n;
      }
  CHECK(evaluate_baseline(e).window.mae() == doctest::Approx(abs_sum / n).epsilon(1e-12));
}
