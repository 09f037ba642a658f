#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "msftgcn/data.hpp"
#include "msftgcn/model.hpp"
#include "msftgcn/training.hpp"

namespace msftgcn {

struct DataSource {
  enum class Kind { synthetic, files };
  Kind kind = Kind::synthetic;
  SyntheticOptions synthetic;
  // files: time-major TNS1 cube, `from,to,cost` CSV, optional TNS1 missing mask (nonzero = missing)
  std::filesystem::path cube;
  std::filesystem::path adjacency;
  std::filesystem::path mask;
  std::optional<std::size_t> nodes;
};

// Everything one run needs. JSON keys:
//   q, T_p, T_h, T_d, T_w, bandwidth, layers, hidden_f, r, split, seed, lr,
//   epochs, batch_size, fusion_order
// plus optional patience, optimizer, beta1, beta2, eps, clip_norm, f_out,
// gaussian_kernel, sweep_parallel and a "data" object.
struct ExperimentConfig {
  SegmentSpec segments{8, 4, 4, 4, 4};
  ModelConfig model;
  TrainConfig train;
  std::array<double, 3> split{0.6, 0.2, 0.2};
  bool gaussian_kernel = true;
  bool sweep_parallel = false;
  DataSource data;

  void validate() const;
  // Canonical form with every default filled in.
  nlohmann::json to_json() const;
  // 16 hex digits of FNV-1a over the canonical JSON.
  std::string hash() const;
};

// Relative data paths resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// N=4 synthetic ring, 15 days, q=8, T_p=T_h=T_d=T_w=4, b=2, two layers,
// adam lr 1e-2, batch 4, 40 epochs, seed 7.
ExperimentConfig desk_config();

std::string fnv1a_hex(std::string_view bytes);

}  // namespace msftgcn
