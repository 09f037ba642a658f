#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msftgcn/graph.hpp"
#include "msftgcn/tensor.hpp"

namespace msftgcn {

// Inclusive 1-based range of time indices.
struct TimeRange {
  std::size_t first = 1;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last >= first ? last - first + 1 : 0; }
  bool contains(std::size_t t) const noexcept { return t >= first && t <= last; }
  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

// Observation cube in time-major layout: cube(t-1, node, feature).
struct TrafficDataset {
  DenseTensor3 cube;
  std::size_t q = 1;          // samples per day
  std::vector<double> mean;   // per-feature training mean; empty before normalization
  std::vector<std::uint8_t> missing;  // optional, same size as cube; 1 marks a missing entry

  std::size_t steps() const noexcept { return cube.dims().d1; }
  std::size_t nodes() const noexcept { return cube.dims().d2; }
  std::size_t features() const noexcept { return cube.dims().d3; }
};

// Window lengths of the three history segments and the prediction window.
struct SegmentSpec {
  std::size_t q = 1;
  std::size_t T_p = 1;
  std::size_t T_h = 1;
  std::size_t T_d = 1;
  std::size_t T_w = 1;

  // Throws ConfigError unless T_d and T_w are positive multiples of T_p,
  // T_h >= 1 and T_p <= q (a longer window would overlap the target).
  void validate() const;
  std::size_t days_back() const noexcept { return T_d / T_p; }
  std::size_t weeks_back() const noexcept { return T_w / T_p; }
  // Smallest 1-based t0 whose three segments start at index >= 1.
  std::size_t min_anchor() const noexcept;
};

// Inputs are N x F x len; target is N x F_out x T_p covering (t0, t0 + T_p].
struct SegmentBatch {
  DenseTensor3 hourly;
  DenseTensor3 daily;
  DenseTensor3 weekly;
  DenseTensor3 target;
  std::size_t t0 = 0;
};

// 1-based time indices feeding each segment, in slice order.
struct SegmentIndices {
  std::vector<std::size_t> hourly;
  std::vector<std::size_t> daily;
  std::vector<std::size_t> weekly;
  std::vector<std::size_t> target;
};

// Fills missing entries along time per (node, feature): linear between observed
// neighbours, nearest observed value at the ends. Observed entries are copied as is.
DenseTensor3 interpolate_missing(const DenseTensor3& cube, std::span<const std::uint8_t> mask);

struct NormalizedCube {
  DenseTensor3 cube;
  std::vector<double> mean;
};

// Subtracts the per-feature mean over `train` (all nodes) from every entry.
NormalizedCube zero_mean_normalize(const DenseTensor3& cube, TimeRange train);
DenseTensor3 denormalize_cube(const DenseTensor3& cube, std::span<const double> mean);
// For N x F x T tensors (segments, predictions): adds mean[f] to feature f.
DenseTensor3 denormalize_segment(const DenseTensor3& segment, std::span<const double> mean);

// Throws RangeError naming the admissible anchor interval when t0 is outside it.
SegmentIndices segment_indices(std::size_t steps, std::size_t t0, const SegmentSpec& spec);
SegmentBatch extract_segments(const DenseTensor3& cube, std::size_t t0, const SegmentSpec& spec,
                              std::size_t out_features = 1);

struct Split {
  TimeRange train;
  TimeRange val;
  TimeRange test;
};

Split chronological_split(std::size_t steps, std::array<double, 3> ratios);

// Anchors whose target window lies inside `partition`; inputs may reach back
// into earlier partitions but never past t0. Throws ConfigError when empty.
std::vector<std::size_t> anchors_in(TimeRange partition, const SegmentSpec& spec,
                                    std::size_t steps);

struct SyntheticOptions {
  std::size_t nodes = 4;
  std::size_t days = 15;
  std::size_t q = 8;
  std::uint64_t seed = 7;
  double noise = 4.0;             // innovation std of the latent AR state
  double coupling = 0.3;          // pull of each latent state towards its ring neighbours
  double persistence = 0.9;       // AR(1) coefficient of the latent state
  double weekly_amplitude = 0.3;  // relative day-of-week modulation of the daily profile
};

struct SyntheticData {
  TrafficDataset dataset;
  GraphTopology graph;  // ring, costs are distances
};

// Ring of detectors; flow = level + amplitude * weekly(day) * daily(phase) + latent,
// where the latent state is a neighbour-coupled AR(1) driven by seeded noise.
SyntheticData generate_synthetic(const SyntheticOptions& options);

}  // namespace msftgcn
