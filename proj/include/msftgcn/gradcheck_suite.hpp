#pragma once

#include <cstdint>
#include <vector>

#include "msftgcn/config.hpp"
#include "msftgcn/gradcheck.hpp"

namespace msftgcn {

struct GradCheckSettings {
  double h = 1e-6;
  int probes = 20;
  double op_tolerance = 1e-5;
  double model_tolerance = 1e-4;
  std::uint64_t seed = 1;
};

// Every op VJP on small random inputs.
std::vector<GradCheckReport> gradcheck_ops(const GradCheckSettings& settings);

// End-to-end loss on one training batch of `config`, one report per parameter tensor.
std::vector<GradCheckReport> gradcheck_model(const ExperimentConfig& config,
                                             const GradCheckSettings& settings);

}  // namespace msftgcn
