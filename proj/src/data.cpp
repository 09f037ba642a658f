#include "msftgcn/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "msftgcn/error.hpp"
#include "msftgcn/rng.hpp"

namespace msftgcn {

void SegmentSpec::validate() const {
  if (q < 1) throw ConfigError("q must be >= 1");
  if (T_p < 1) throw ConfigError("T_p must be >= 1");
  if (T_h < 1) throw ConfigError("T_h must be >= 1");
  if (T_d < T_p || T_d % T_p != 0) {
    throw ConfigError("T_d = " + std::to_string(T_d) + " must be a positive multiple of T_p = " +
                      std::to_string(T_p));
  }
  if (T_w < T_p || T_w % T_p != 0) {
    throw ConfigError("T_w = " + std::to_string(T_w) + " must be a positive multiple of T_p = " +
                      std::to_string(T_p));
  }
  if (T_p > q) {
    throw ConfigError("T_p = " + std::to_string(T_p) + " exceeds q = " + std::to_string(q) +
                      "; daily windows would overlap the prediction window");
  }
}

std::size_t SegmentSpec::min_anchor() const noexcept {
  return std::max({T_h, q * days_back(), 7 * q * weeks_back()});
}

DenseTensor3 interpolate_missing(const DenseTensor3& cube, std::span<const std::uint8_t> mask) {
  if (mask.size() != cube.size()) {
    throw ShapeError("missing mask has " + std::to_string(mask.size()) + " entries, cube has " +
                     std::to_string(cube.size()));
  }
  const Dims3 d = cube.dims();
  DenseTensor3 out = cube;
  const auto missing = [&](std::size_t t, std::size_t n, std::size_t f) {
    return mask[(t * d.d2 + n) * d.d3 + f] != 0;
  };
  std::vector<std::size_t> observed;
  for (std::size_t n = 0; n < d.d2; ++n) {
    for (std::size_t f = 0; f < d.d3; ++f) {
      observed.clear();
      for (std::size_t t = 0; t < d.d1; ++t)
        if (!missing(t, n, f)) observed.push_back(t);
      if (observed.empty()) {
        if (d.d1 == 0) continue;
        throw DataError("series of node " + std::to_string(n) + ", feature " +
                        std::to_string(f) + " has no observed values");
      }
      for (std::size_t t = 0; t < observed.front(); ++t) out(t, n, f) = cube(observed.front(), n, f);
      for (std::size_t t = observed.back() + 1; t < d.d1; ++t) {
        out(t, n, f) = cube(observed.back(), n, f);
      }
      for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
        const std::size_t a = observed[k];
        const std::size_t b = observed[k + 1];
        const double va = cube(a, n, f);
        const double vb = cube(b, n, f);
        for (std::size_t t = a + 1; t < b; ++t) {
          out(t, n, f) =
              va + (vb - va) * static_cast<double>(t - a) / static_cast<double>(b - a);
        }
      }
    }
  }
  return out;
}

NormalizedCube zero_mean_normalize(const DenseTensor3& cube, TimeRange train) {
  const Dims3 d = cube.dims();
  if (train.size() == 0) throw ConfigError("zero_mean_normalize: empty training range");
  if (train.first < 1 || train.last > d.d1) {
    throw RangeError("training range [" + std::to_string(train.first) + ", " +
                     std::to_string(train.last) + "] outside [1, " + std::to_string(d.d1) + "]");
  }
  std::vector<double> mean(d.d3, 0.0);
  for (std::size_t t = train.first - 1; t < train.last; ++t)
    for (std::size_t n = 0; n < d.d2; ++n)
      for (std::size_t f = 0; f < d.d3; ++f) mean[f] += cube(t, n, f);
  const double count = static_cast<double>(train.size() * d.d2);
  for (double& m : mean) m /= count;

  DenseTensor3 out(d);
  for (std::size_t t = 0; t < d.d1; ++t)
    for (std::size_t n = 0; n < d.d2; ++n)
      for (std::size_t f = 0; f < d.d3; ++f) out(t, n, f) = cube(t, n, f) - mean[f];
  return {std::move(out), std::move(mean)};
}

DenseTensor3 denormalize_cube(const DenseTensor3& cube, std::span<const double> mean) {
  const Dims3 d = cube.dims();
  if (mean.size() != d.d3) throw ShapeError("mean vector does not match the feature count");
  DenseTensor3 out(d);
  for (std::size_t t = 0; t < d.d1; ++t)
    for (std::size_t n = 0; n < d.d2; ++n)
      for (std::size_t f = 0; f < d.d3; ++f) out(t, n, f) = cube(t, n, f) + mean[f];
  return out;
}

DenseTensor3 denormalize_segment(const DenseTensor3& segment, std::span<const double> mean) {
  const Dims3 d = segment.dims();
  if (mean.size() < d.d2) throw ShapeError("mean vector shorter than the feature count");
  DenseTensor3 out(d);
  for (std::size_t n = 0; n < d.d1; ++n)
    for (std::size_t f = 0; f < d.d2; ++f)
      for (std::size_t t = 0; t < d.d3; ++t) out(n, f, t) = segment(n, f, t) + mean[f];
  return out;
}

SegmentIndices segment_indices(std::size_t steps, std::size_t t0, const SegmentSpec& spec) {
  spec.validate();
  const std::size_t lo = spec.min_anchor();
  if (steps < spec.T_p || t0 < lo || t0 + spec.T_p > steps) {
    const std::string hi = steps >= spec.T_p ? std::to_string(steps - spec.T_p) : "none";
    throw RangeError("anchor t0 = " + std::to_string(t0) + " is not admissible: minimal t0 is " +
                     std::to_string(lo) + ", maximal t0 is " + hi);
  }
  SegmentIndices idx;
  for (std::size_t k = t0 - spec.T_h + 1; k <= t0; ++k) idx.hourly.push_back(k);
  // Periodic windows step back d periods and keep the target's phase.
  const auto periodic = [&](std::size_t period, std::size_t count, std::vector<std::size_t>& out) {
    for (std::size_t d = count; d >= 1; --d) {
      const std::size_t start = t0 - period * d + 1;
      for (std::size_t m = 0; m < spec.T_p; ++m) out.push_back(start + m);
    }
  };
  periodic(spec.q, spec.days_back(), idx.daily);
  periodic(7 * spec.q, spec.weeks_back(), idx.weekly);
  for (std::size_t m = 1; m <= spec.T_p; ++m) idx.target.push_back(t0 + m);
  return idx;
}

namespace {

DenseTensor3 gather(const DenseTensor3& cube, const std::vector<std::size_t>& times,
                    std::size_t features) {
  const Dims3 d = cube.dims();
  DenseTensor3 out({d.d2, features, times.size()});
  for (std::size_t s = 0; s < times.size(); ++s)
    for (std::size_t n = 0; n < d.d2; ++n)
      for (std::size_t f = 0; f < features; ++f) out(n, f, s) = cube(times[s] - 1, n, f);
  return out;
}

}  // namespace

SegmentBatch extract_segments(const DenseTensor3& cube, std::size_t t0, const SegmentSpec& spec,
                              std::size_t out_features) {
  const Dims3 d = cube.dims();
  if (out_features < 1 || out_features > d.d3) {
    throw ConfigError("out_features = " + std::to_string(out_features) + " outside [1, " +
                      std::to_string(d.d3) + "]");
  }
  const SegmentIndices idx = segment_indices(d.d1, t0, spec);
  SegmentBatch batch;
  batch.hourly = gather(cube, idx.hourly, d.d3);
  batch.daily = gather(cube, idx.daily, d.d3);
  batch.weekly = gather(cube, idx.weekly, d.d3);
  batch.target = gather(cube, idx.target, out_features);
  batch.t0 = t0;
  return batch;
}

Split chronological_split(std::size_t steps, std::array<double, 3> ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios sum to " + std::to_string(sum) + ", expected 1");
  }
  const auto train_end = static_cast<std::size_t>(std::llround(steps * ratios[0]));
  const auto val_end = static_cast<std::size_t>(std::llround(steps * (ratios[0] + ratios[1])));
  Split s{{1, train_end}, {train_end + 1, val_end}, {val_end + 1, steps}};
  if (s.train.size() == 0 || s.val.size() == 0 || s.test.size() == 0) {
    throw ConfigError("split of " + std::to_string(steps) + " steps leaves an empty partition");
  }
  return s;
}

std::vector<std::size_t> anchors_in(TimeRange partition, const SegmentSpec& spec,
                                    std::size_t steps) {
  spec.validate();
  std::vector<std::size_t> out;
  const std::size_t lo = std::max(spec.min_anchor(), partition.first - 1);
  const std::size_t last = std::min(partition.last, steps);
  for (std::size_t t0 = lo; t0 + spec.T_p <= last; ++t0) out.push_back(t0);
  if (out.empty()) {
    throw ConfigError("partition [" + std::to_string(partition.first) + ", " +
                      std::to_string(partition.last) +
                      "] is too small for one segment batch (minimal anchor " +
                      std::to_string(spec.min_anchor()) + ", T_p " + std::to_string(spec.T_p) +
                      ")");
  }
  return out;
}

SyntheticData generate_synthetic(const SyntheticOptions& o) {
  if (o.nodes < 2) throw ConfigError("synthetic data needs at least 2 nodes");
  if (o.q < 4) throw ConfigError("synthetic data needs q >= 4");
  if (o.days < 15) {
    throw ConfigError("synthetic data needs at least 15 days for weekly segments, got " +
                      std::to_string(o.days));
  }
  if (o.noise < 0.0 || o.coupling < 0.0) throw ConfigError("noise and coupling must be >= 0");

  Rng rng(o.seed);
  const std::size_t n_nodes = o.nodes;
  std::vector<double> level(n_nodes), amplitude(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    level[i] = 60.0 + 30.0 * rng.uniform();
    amplitude[i] = 40.0 + 20.0 * rng.uniform();
  }
  SyntheticData out;
  out.graph.node_count = n_nodes;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    out.graph.edges.push_back({i, (i + 1) % n_nodes, 1.0 + 2.0 * rng.uniform()});
    if (n_nodes == 2) break;
  }

  std::vector<double> daily(o.q);
  for (std::size_t p = 0; p < o.q; ++p) {
    daily[p] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(p) /
                                        static_cast<double>(o.q)));
  }
  std::array<double, 7> weekly{};
  for (std::size_t w = 0; w < 7; ++w) {
    weekly[w] = 1.0 + o.weekly_amplitude * std::sin(2.0 * std::numbers::pi *
                                                    static_cast<double>(w) / 7.0);
  }

  const std::size_t steps = o.days * o.q;
  DenseTensor3 cube({steps, n_nodes, 1});
  std::vector<double> latent(n_nodes, 0.0), next(n_nodes, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double left = latent[(i + n_nodes - 1) % n_nodes];
      const double right = latent[(i + 1) % n_nodes];
      const double pull = o.coupling * (0.5 * (left + right) - latent[i]);
      const double innovation = o.noise * rng.normal();
      next[i] = o.persistence * (latent[i] + pull) + innovation;
    }
    latent.swap(next);
    const std::size_t phase = t % o.q;
    const std::size_t day = t / o.q;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      cube(t, i, 0) = level[i] + amplitude[i] * weekly[day % 7] * daily[phase] + latent[i];
    }
  }
  out.dataset.cube = std::move(cube);
  out.dataset.q = o.q;
  return out;
}

}  // namespace msftgcn
