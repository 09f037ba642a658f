#include "msftgcn/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "msftgcn/error.hpp"

namespace msftgcn {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

void ExperimentConfig::validate() const {
  segments.validate();
  if (segments.T_p != model.T_p || segments.T_h != model.T_h || segments.T_d != model.T_d ||
      segments.T_w != model.T_w) {
    throw ConfigError("segment and model window lengths disagree");
  }
  model.validate();
  train.validate();
  double sum = 0.0;
  for (double r : split) {
    if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios sum to " + std::to_string(sum) + ", expected 1");
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["q"] = segments.q;
  j["T_p"] = segments.T_p;
  j["T_h"] = segments.T_h;
  j["T_d"] = segments.T_d;
  j["T_w"] = segments.T_w;
  j["bandwidth"] = model.bandwidth;
  j["layers"] = model.layers;
  j["hidden_f"] = model.hidden_f;
  j["r"] = model.r;
  j["f_out"] = model.out_features;
  j["fusion_order"] = json::array();
  for (SegmentKind k : model.fusion_order) j["fusion_order"].push_back(segment_name(k));
  j["split"] = split;
  j["seed"] = train.seed;
  j["lr"] = train.lr;
  j["epochs"] = train.epochs;
  j["batch_size"] = train.batch_size;
  j["patience"] = train.patience;
  j["optimizer"] = train.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  j["beta1"] = train.beta1;
  j["beta2"] = train.beta2;
  j["eps"] = train.eps;
  j["clip_norm"] = train.clip_norm;
  j["gaussian_kernel"] = gaussian_kernel;
  j["sweep_parallel"] = sweep_parallel;
  json d;
  if (data.kind == DataSource::Kind::synthetic) {
    const auto& s = data.synthetic;
    d = {{"kind", "synthetic"},       {"nodes", s.nodes},
         {"days", s.days},            {"seed", s.seed},
         {"noise", s.noise},          {"coupling", s.coupling},
         {"persistence", s.persistence}, {"weekly_amplitude", s.weekly_amplitude}};
  } else {
    d = {{"kind", "files"}, {"cube", data.cube.string()}, {"adjacency", data.adjacency.string()}};
    if (!data.mask.empty()) d["mask"] = data.mask.string();
    if (data.nodes) d["nodes"] = *data.nodes;
  }
  j["data"] = d;
  return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError(std::string("unknown config key '") + key + "' in " + where);
    }
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"q", "T_p", "T_h", "T_d", "T_w", "bandwidth", "layers", "hidden_f", "r",
                  "split", "seed", "lr", "epochs", "batch_size", "fusion_order", "patience",
                  "optimizer", "beta1", "beta2", "eps", "clip_norm", "f_out", "gaussian_kernel",
                  "sweep_parallel", "data"},
                 "config");
  ExperimentConfig c;
  read(j, "q", c.segments.q);
  read(j, "T_p", c.segments.T_p);
  read(j, "T_h", c.segments.T_h);
  read(j, "T_d", c.segments.T_d);
  read(j, "T_w", c.segments.T_w);
  c.model.T_p = c.segments.T_p;
  c.model.T_h = c.segments.T_h;
  c.model.T_d = c.segments.T_d;
  c.model.T_w = c.segments.T_w;
  read(j, "bandwidth", c.model.bandwidth);
  read(j, "layers", c.model.layers);
  read(j, "hidden_f", c.model.hidden_f);
  read(j, "r", c.model.r);
  read(j, "f_out", c.model.out_features);
  if (j.contains("fusion_order")) {
    std::vector<std::string> order;
    read(j, "fusion_order", order);
    if (order.size() != 3) throw ConfigError("fusion_order must list the three segments");
    for (std::size_t k = 0; k < 3; ++k) c.model.fusion_order[k] = parse_segment_kind(order[k]);
  }
  if (j.contains("split")) {
    std::vector<double> split;
    read(j, "split", split);
    if (split.size() != 3) throw ConfigError("split must hold three ratios");
    c.split = {split[0], split[1], split[2]};
  }
  read(j, "seed", c.train.seed);
  read(j, "lr", c.train.lr);
  read(j, "epochs", c.train.epochs);
  read(j, "batch_size", c.train.batch_size);
  read(j, "patience", c.train.patience);
  if (j.contains("optimizer")) {
    std::string opt;
    read(j, "optimizer", opt);
    if (opt == "adam") {
      c.train.optimizer = OptimizerKind::adam;
    } else if (opt == "sgd") {
      c.train.optimizer = OptimizerKind::sgd;
    } else {
      throw ConfigError("optimizer must be 'adam' or 'sgd', got '" + opt + "'");
    }
  }
  read(j, "beta1", c.train.beta1);
  read(j, "beta2", c.train.beta2);
  read(j, "eps", c.train.eps);
  read(j, "clip_norm", c.train.clip_norm);
  read(j, "gaussian_kernel", c.gaussian_kernel);
  read(j, "sweep_parallel", c.sweep_parallel);

  if (j.contains("data")) {
    const json& d = j.at("data");
    if (!d.is_object()) throw ConfigError("config key 'data' must be an object");
    std::string kind = "synthetic";
    read(d, "kind", kind);
    if (kind == "synthetic") {
      reject_unknown(d, {"kind", "nodes", "days", "seed", "noise", "coupling", "persistence",
                         "weekly_amplitude"},
                     "data");
      auto& s = c.data.synthetic;
      read(d, "nodes", s.nodes);
      read(d, "days", s.days);
      read(d, "seed", s.seed);
      read(d, "noise", s.noise);
      read(d, "coupling", s.coupling);
      read(d, "persistence", s.persistence);
      read(d, "weekly_amplitude", s.weekly_amplitude);
    } else if (kind == "files") {
      reject_unknown(d, {"kind", "cube", "adjacency", "mask", "nodes"}, "data");
      c.data.kind = DataSource::Kind::files;
      std::string cube, adjacency, mask;
      read(d, "cube", cube);
      read(d, "adjacency", adjacency);
      read(d, "mask", mask);
      if (cube.empty() || adjacency.empty()) {
        throw ConfigError("file data source needs 'cube' and 'adjacency'");
      }
      const auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
      };
      c.data.cube = resolve(cube);
      c.data.adjacency = resolve(adjacency);
      if (!mask.empty()) c.data.mask = resolve(mask);
      if (d.contains("nodes")) {
        std::size_t n = 0;
        read(d, "nodes", n);
        c.data.nodes = n;
      }
    } else {
      throw ConfigError("data.kind must be 'synthetic' or 'files', got '" + kind + "'");
    }
  }
  c.data.synthetic.q = c.segments.q;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.segments = {8, 4, 4, 4, 4};
  c.model.T_p = c.model.T_h = c.model.T_d = c.model.T_w = 4;
  c.model.bandwidth = 2;
  c.model.layers = 2;
  c.model.hidden_f = 16;
  c.model.r = 4;
  c.train.lr = 1e-2;
  c.train.epochs = 40;
  c.train.batch_size = 4;
  c.train.seed = 7;
  c.train.patience = 10;
  c.data.synthetic.nodes = 4;
  c.data.synthetic.days = 15;
  c.data.synthetic.q = 8;
  c.data.synthetic.seed = 7;
  c.validate();
  return c;
}

}  // namespace msftgcn
