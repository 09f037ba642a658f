#include "msftgcn/cli.hpp"

#include <chrono>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msftgcn/checkpoint.hpp"
#include "msftgcn/config.hpp"
#include "msftgcn/error.hpp"
#include "msftgcn/gradcheck_suite.hpp"
#include "msftgcn/graph.hpp"
#include "msftgcn/pipeline.hpp"
#include "msftgcn/tns1.hpp"

namespace msftgcn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
    throw ConfigError("bad bandwidth value '" + std::string(s) + "'");
  }
  return v;
}

// "1,2,4", "1-12" or a mix like "1-3,6".
std::vector<std::size_t> parse_range(const std::string& text) {
  std::vector<std::size_t> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(parse_count(item));
    } else {
      const std::size_t lo = parse_count(item.substr(0, dash));
      const std::size_t hi = parse_count(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty bandwidth range '" + std::string(item) + "'");
      for (std::size_t b = lo; b <= hi; ++b) out.push_back(b);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("empty bandwidth range");
  return out;
}

json report_json(const GradCheckReport& r) {
  return {{"op", r.op_name},
          {"max_relative_error", r.max_relative_error},
          {"tolerance", r.tolerance},
          {"probes", r.probe_count},
          {"pass", r.pass}};
}

json train_summary(const TrainReport& r, const std::string& hash) {
  json j = {{"config_hash", hash},
            {"initial_train_loss", r.initial_train_loss},
            {"epochs_run", r.epochs.size()},
            {"best_val_mae", r.best_val_mae},
            {"stopped_early", r.stopped_early},
            {"wall_seconds", r.wall_seconds}};
  j["best_epoch"] = r.best_epoch ? json(*r.best_epoch) : json(nullptr);
  j["final_train_loss"] = r.epochs.empty() ? r.initial_train_loss : r.epochs.back().train_loss;
  return j;
}

int run_train(const fs::path& config_path, const fs::path& out_dir, std::ostream& out,
              std::ostream& err) {
  const ExperimentConfig config = load_config(config_path);
  const std::string hash = config.hash();
  const PreparedExperiment e = prepare_experiment(config);
  err << "training on " << e.train.size() << " windows, validating on " << e.val.size() << "\n";
  const TrainResult result = run_training(e);
  fs::create_directories(out_dir);
  save_checkpoint(out_dir / "checkpoint.json", result.params, hash);

  std::ofstream log(out_dir / "report.jsonl", std::ios::binary);
  for (const EpochRecord& rec : result.report.epochs) {
    json line = to_json(rec);
    line["config_hash"] = hash;
    log << line.dump() << "\n";
  }
  const json summary = train_summary(result.report, hash);
  log << summary.dump() << "\n";
  if (!log) throw Error("could not write " + (out_dir / "report.jsonl").string());
  out << summary.dump(2) << "\n";
  return 0;
}

int run_eval(const fs::path& config_path, const fs::path& checkpoint, std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  const PreparedExperiment e = prepare_experiment(config);
  const ModelParams params = load_checkpoint(checkpoint, initial_params(e));
  const HorizonMetrics model = evaluate_test(e, params);
  const HorizonMetrics baseline = evaluate_baseline(e);
  const json j = {
      {"config_hash", config.hash()},
      {"minutes_per_step", 1440.0 / static_cast<double>(config.segments.q)},
      {"test_windows", e.test.size()},
      {"model", to_json(model)},
      {"historical_average", to_json(baseline)},
      {"reference",
       {{"dataset", "PEMSD8"},
        {"horizon_minutes", 15},
        {"mae", 13.77},
        {"rmse", 21.84},
        {"reproduced", false}}},
  };
  out << j.dump(2) << "\n";
  return 0;
}

int run_gradcheck(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  GradCheckSettings settings;
  settings.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  std::vector<GradCheckReport> reports = gradcheck_ops(settings);
  for (const auto& r : gradcheck_model(desk_config(), settings)) reports.push_back(r);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json list = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    list.push_back(report_json(r));
    if (!r.pass) {
      ok = false;
      err << "gradcheck failed: " << r.op_name << " relative error " << r.max_relative_error
          << " > " << r.tolerance << "\n";
    }
  }
  out << json{{"config_hash", desk_config().hash()},
              {"pass", ok},
              {"seconds", seconds},
              {"reports", list}}
             .dump(2)
      << "\n";
  return ok ? 0 : 1;
}

int run_synth(const fs::path& out_dir, const SyntheticOptions& opts, std::ostream& out) {
  const SyntheticData s = generate_synthetic(opts);
  fs::create_directories(out_dir);
  write_tns1(out_dir / "cube.tns", s.dataset.cube);
  write_file_bytes(out_dir / "adjacency.csv", format_adjacency_csv(s.graph));
  const Dims3 d = s.dataset.cube.dims();
  const json options = {{"nodes", opts.nodes},       {"days", opts.days},
                        {"q", opts.q},               {"seed", opts.seed},
                        {"noise", opts.noise},       {"coupling", opts.coupling},
                        {"persistence", opts.persistence},
                        {"weekly_amplitude", opts.weekly_amplitude}};
  out << json{{"config_hash", fnv1a_hex(options.dump())},
              {"options", options},
              {"cube", (out_dir / "cube.tns").string()},
              {"adjacency", (out_dir / "adjacency.csv").string()},
              {"dims", {d.d1, d.d2, d.d3}}}
             .dump(2)
      << "\n";
  return 0;
}

int run_sweep(const fs::path& config_path, const std::string& range, std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  const std::vector<std::size_t> bs = parse_range(range);
  const SweepReport report = sweep_bandwidth(config, bs);
  json j = to_json(report);
  j["config_hash"] = config.hash();
  out << j.dump(2) << "\n";
  return 0;
}

int run_convert_check(const fs::path& path, std::ostream& out) {
  const std::string bytes = read_file_bytes(path);
  const Tns1Header h = parse_tns1_header(bytes, 0);
  const DenseTensor3 t = decode_tns1(bytes);
  out << json{{"path", path.string()},
              {"dtype", h.dtype == Dtype::f32 ? "f32" : "f64"},
              {"ndim", h.dims.size()},
              {"dims", h.dims},
              {"payload_bytes", h.payload_bytes},
              {"elements", t.size()},
              {"valid", true}}
             .dump(2)
      << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"MS-FTGCN traffic forecaster", "msftgcn"};
  app.require_subcommand(1);

  fs::path config_path, out_dir = "run", checkpoint, tns_path;
  std::string range;
  std::uint64_t grad_seed = 1;
  SyntheticOptions synth;

  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  train_cmd->add_option("--out", out_dir, "output directory");

  auto* eval_cmd = app.add_subcommand("eval", "test-set metrics for a checkpoint");
  eval_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint manifest")->required();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
  grad_cmd->add_option("--seed", grad_seed, "probe seed");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic cube and adjacency CSV");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--nodes", synth.nodes, "detector count");
  synth_cmd->add_option("--days", synth.days, "days of data");
  synth_cmd->add_option("--q", synth.q, "samples per day");
  synth_cmd->add_option("--noise", synth.noise, "latent innovation std");
  synth_cmd->add_option("--coupling", synth.coupling, "neighbour coupling");

  auto* sweep_cmd = app.add_subcommand("sweep-bandwidth", "train once per bandwidth");
  sweep_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  sweep_cmd->add_option("--range", range, "e.g. 1,2,4 or 1-4")->required();

  auto* convert_cmd = app.add_subcommand("convert-check", "validate a TNS1 file");
  convert_cmd->add_option("--tns", tns_path, "TNS1 file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*train_cmd) return run_train(config_path, out_dir, out, err);
    if (*eval_cmd) return run_eval(config_path, checkpoint, out);
    if (*grad_cmd) return run_gradcheck(grad_seed, out, err);
    if (*synth_cmd) return run_synth(out_dir, synth, out);
    if (*sweep_cmd) return run_sweep(config_path, range, out);
    if (*convert_cmd) return run_convert_check(tns_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace msftgcn
