#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "msftgcn/checkpoint.hpp"
#include "msftgcn/cli.hpp"
#include "msftgcn/config.hpp"
#include "msftgcn/error.hpp"
#include "msftgcn/metrics.hpp"
#include "msftgcn/pipeline.hpp"
#include "msftgcn/tns1.hpp"
#include "support.hpp"

using namespace msftgcn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "msftgcn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("msftgcn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  std::ofstream(dir / name) << j.dump(2);
  return dir / name;
}

json small_config() {
  json j = desk_config().to_json();
  j["epochs"] = 3;
  j["patience"] = 0;
  return j;
}

}  // namespace

TEST_CASE("mae and rmse hand values") {
  const std::vector<double> p{3, 1}, o{1, 1};
  CHECK(mae(p, o) == 1.0);
  CHECK(std::abs(rmse(p, o) - std::sqrt(2.0)) <= 1e-12);
  CHECK(mae(o, o) == 0.0);
  CHECK(rmse(o, o) == 0.0);
  const std::vector<double> a{0.5, -2.0, 4.0}, b{1.0, 1.0, 1.0};
  CHECK(std::abs(mae(a, b) - 6.5 / 3.0) <= 1e-12);
  CHECK(std::abs(rmse(a, b) - std::sqrt(18.25 / 3.0)) <= 1e-12);
  CHECK_THROWS_AS(mae(p, std::vector<double>{1}), ShapeError);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), ShapeError);
}

TEST_CASE("metric report invariants") {
  CHECK_NOTHROW(MetricReport(1, 1.0, 1.5, 2));
  CHECK_THROWS_AS(MetricReport(1, 2.0, 1.0, 2), ContractError);
  CHECK_THROWS_AS(MetricReport(1, -1.0, 1.0, 2), ContractError);
  CHECK_THROWS_AS(MetricReport(1, 0.0, 0.0, 0), ContractError);
}

TEST_CASE("horizon metrics per step, pooled and at quarter marks") {
  Rng rng(2);
  std::vector<DenseTensor3> preds, obs;
  for (int k = 0; k < 5; ++k) {
    preds.push_back(testing::random_tensor({3, 1, 8}, rng, 0, 10));
    obs.push_back(testing::random_tensor({3, 1, 8}, rng, 0, 10));
  }
  const HorizonMetrics h = horizon_metrics(preds, obs);
  REQUIRE(h.per_step.size() == 8);
  REQUIRE(h.quarter_marks.size() == 4);
  CHECK(h.quarter_marks[0].horizon_steps() == 2);
  CHECK(h.quarter_marks[3].horizon_steps() == 8);
  for (std::size_t s = 0; s < 8; ++s) {
    double a = 0.0, q = 0.0;
    for (int k = 0; k < 5; ++k)
      for (std::size_t i = 0; i < 3; ++i) {
        const double e = preds[k](i, 0, s) - obs[k](i, 0, s);
        a += std::abs(e);
        q += e * e;
      }
    CHECK(std::abs(h.per_step[s].mae() - a / 15.0) <= 1e-12);
    CHECK(std::abs(h.per_step[s].rmse() - std::sqrt(q / 15.0)) <= 1e-12);
    CHECK(h.per_step[s].n() == 15);
    CHECK(h.per_step[s].rmse() >= h.per_step[s].mae());
  }
  CHECK(h.window.n() == 120);
  CHECK(h.window.horizon_steps() == 8);
  preds.pop_back();
  CHECK_THROWS(horizon_metrics(preds, obs));
}

TEST_CASE("reported metrics use de-normalized predictions") {
  const PreparedExperiment e = prepare_experiment(desk_config());
  REQUIRE(std::abs(e.dataset.mean[0]) > 1.0);
  const ModelParams p = initial_params(e);
  double abs_sum = 0.0, raw_abs_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < e.test.size(); ++k) {
    const DenseTensor3 y = model_forward(e.test[k], e.context, p);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t s = 0; s < 4; ++s) {
        const double observed = e.raw_cube(e.test_anchors[k] + s, i, 0);
        abs_sum += std::abs(y(i, 0, s) + e.dataset.mean[0] - observed);
        raw_abs_sum += std::abs(y(i, 0, s) - observed);
        ++n;
      }
  }
  const double got = evaluate_test(e, p).window.mae();
  CHECK(got == doctest::Approx(abs_sum / n).epsilon(1e-12));
  CHECK(std::abs(got - raw_abs_sum / n) > 1.0);
}

TEST_CASE("config parsing and hashing") {
  const ExperimentConfig d = desk_config();
  const ExperimentConfig back = config_from_json(d.to_json());
  CHECK(back.to_json() == d.to_json());
  CHECK(back.hash() == d.hash());
  CHECK(d.hash().size() == 16);
  json j = d.to_json();
  j["bandwidth"] = 1;
  CHECK(config_from_json(j).hash() != d.hash());
  j["colour"] = "red";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"split", {0.5, 0.2, 0.2}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"optimizer", "rmsprop"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"data", {{"kind", "files"}}}}), ConfigError);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("checkpoint round trip and dim mismatch") {
  const fs::path dir = scratch("ckpt");
  const PreparedExperiment e = prepare_experiment(desk_config());
  const ModelParams p = initial_params(e);
  save_checkpoint(dir / "model.json", p, "abc");
  CHECK(fs::exists(dir / "model.tns"));
  const ModelParams q = load_checkpoint(dir / "model.json", zeros_like(p));
  const auto a = p.tensors(), b = q.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
  const json manifest = json::parse(read_file_bytes(dir / "model.json"));
  CHECK(manifest["config_hash"] == "abc");

  ModelConfig wide = e.context.config;
  wide.hidden_f = 8;
  try {
    load_checkpoint(dir / "model.json", init_params(wide, 1));
    FAIL("expected a config error");
  } catch (const ConfigError& err) {
    const std::string what = err.what();
    CHECK(what.find("1x16x4") != std::string::npos);
    CHECK(what.find("1x8x4") != std::string::npos);
  }
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  const CliRun r = run_cli({"synth", "--out", "x", "--bogus", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run_cli({"train"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cli runtime failures exit 1") {
  const fs::path dir = scratch("fail");
  CHECK(run_cli({"train", "--config", (dir / "missing.json").string()}).code == 1);
  std::ofstream(dir / "bad.tns") << "XXXXjunk";
  const CliRun r = run_cli({"convert-check", "--tns", (dir / "bad.tns").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("offset 0") != std::string::npos);
}

TEST_CASE("cli synth is byte-identical for a fixed seed") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run_cli({"synth", "--out", a.string(), "--seed", "7"}).code == 0);
  REQUIRE(run_cli({"synth", "--out", b.string(), "--seed", "7"}).code == 0);
  CHECK(read_file_bytes(a / "cube.tns") == read_file_bytes(b / "cube.tns"));
  CHECK(read_file_bytes(a / "adjacency.csv") == read_file_bytes(b / "adjacency.csv"));
  const CliRun check = run_cli({"convert-check", "--tns", (a / "cube.tns").string()});
  CHECK(check.code == 0);
  const json j = json::parse(check.out);
  CHECK(j["dims"] == json::array({120, 4, 1}));
  CHECK(j["valid"] == true);
}

TEST_CASE("cli train then eval") {
  const fs::path dir = scratch("train");
  const fs::path cfg = write_config(dir, small_config());
  const std::string hash = load_config(cfg).hash();
  const CliRun t = run_cli({"train", "--config", cfg.string(), "--out", (dir / "run").string()});
  REQUIRE(t.code == 0);
  CHECK(json::parse(t.out)["config_hash"] == hash);
  std::ifstream log(dir / "run" / "report.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    CHECK(json::parse(line)["config_hash"] == hash);
    ++lines;
  }
  CHECK(lines == 4);

  const CliRun ev = run_cli({"eval", "--config", cfg.string(), "--checkpoint",
                             (dir / "run" / "checkpoint.json").string()});
  REQUIRE(ev.code == 0);
  const json m = json::parse(ev.out);
  CHECK(m["config_hash"] == hash);
  CHECK(m["model"]["per_step"].size() == 4);
  CHECK(m["model"]["quarter_marks"].size() == 4);
  CHECK(m["minutes_per_step"] == 180.0);
  for (const auto& key : {"model", "historical_average"}) {
    const json& w = m[key]["window"];
    CHECK(w["rmse"].get<double>() >= w["mae"].get<double>());
  }
  CHECK(m["reference"]["reproduced"] == false);

  json wide = small_config();
  wide["hidden_f"] = 8;
  const fs::path wide_cfg = write_config(dir, wide, "wide.json");
  const CliRun bad = run_cli({"eval", "--config", wide_cfg.string(), "--checkpoint",
                              (dir / "run" / "checkpoint.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("1x16x4") != std::string::npos);
  CHECK(bad.err.find("1x8x4") != std::string::npos);
}

TEST_CASE("cli train on file data") {
  const fs::path dir = scratch("files");
  REQUIRE(run_cli({"synth", "--out", dir.string(), "--seed", "3"}).code == 0);
  json j = small_config();
  j["data"] = {{"kind", "files"}, {"cube", "cube.tns"}, {"adjacency", "adjacency.csv"}};
  const fs::path cfg = write_config(dir, j);
  CHECK(run_cli({"train", "--config", cfg.string(), "--out", (dir / "run").string()}).code == 0);

  ExperimentConfig same = desk_config();
  same.data.synthetic.seed = 3;
  const PreparedExperiment from_synth = prepare_experiment(same);
  const PreparedExperiment from_files = prepare_experiment(load_config(cfg));
  CHECK(from_files.raw_cube == from_synth.raw_cube);
}

TEST_CASE("bandwidth sweep") {
  ExperimentConfig c = desk_config();
  c.train.epochs = 2;
  c.train.patience = 0;
  const std::vector<std::size_t> one{1};
  const SweepReport single = sweep_bandwidth(c, one);
  REQUIRE(single.entries.size() == 1);
  CHECK(single.best_b_mae == 1);
  CHECK(single.best_b_rmse == 1);
  const std::vector<std::size_t> dup{2, 2};
  CHECK_THROWS_AS(sweep_bandwidth(c, dup), ConfigError);
  const std::vector<std::size_t> out_of_range{5};
  CHECK_THROWS_AS(sweep_bandwidth(c, out_of_range), ConfigError);

  const std::vector<std::size_t> bs{1, 2, 4};
  const SweepReport seq = sweep_bandwidth(c, bs);
  c.sweep_parallel = true;
  const SweepReport par = sweep_bandwidth(c, bs);
  REQUIRE(seq.entries.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(seq.entries[k].bandwidth == bs[k]);
    CHECK(seq.entries[k].mae == par.entries[k].mae);
    CHECK(seq.entries[k].rmse == par.entries[k].rmse);
    CHECK(seq.entries[k].rmse >= seq.entries[k].mae);
  }
  double best = INFINITY;
  for (const auto& e : seq.entries) best = std::min(best, e.mae);
  for (const auto& e : seq.entries)
    if (e.bandwidth == seq.best_b_mae) CHECK(e.mae == best);

  const fs::path dir = scratch("sweep");
  json j = desk_config().to_json();
  j["epochs"] = 1;
  j["patience"] = 0;
  const fs::path cfg = write_config(dir, j);
  const CliRun r = run_cli({"sweep-bandwidth", "--config", cfg.string(), "--range", "1-2,4"});
  REQUIRE(r.code == 0);
  const json s = json::parse(r.out);
  CHECK(s["entries"].size() == 3);
  CHECK(s["config_hash"] == load_config(cfg).hash());
  CHECK(run_cli({"sweep-bandwidth", "--config", cfg.string(), "--range", "2,2"}).code == 1);
  CHECK(run_cli({"sweep-bandwidth", "--config", cfg.string(), "--range", "a"}).code == 1);
}
