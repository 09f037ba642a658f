#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msftgcn/tensor.hpp"

namespace msftgcn {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;  // distance cost straight from the CSV, or an affinity after conversion
};

struct GraphTopology {
  std::size_t node_count = 0;
  std::vector<Edge> edges;

  // Throws DataError on out-of-range ids, self loops, or negative/non-finite weights.
  void validate() const;
};

struct AdjacencyTensor {
  DenseTensor3 tensor;  // N x N x T
  bool normalized = false;
};

// D^-1/2 (A + I) D^-1/2 with D the row-sum degree matrix of A + I.
Matrix normalize_adjacency(const Matrix& adjacency);

// Dense symmetric weight matrix; duplicate or reversed edges merge by max.
Matrix densify(const GraphTopology& topology);

// Normalizes the topology once and replicates it over T frontal slices.
AdjacencyTensor build_adjacency_tensor(const GraphTopology& topology, std::size_t T);

// w' = exp(-(cost / sigma)^2) with sigma the standard deviation of all edge costs.
// When every cost is equal (sigma == 0) all affinities are 1.
GraphTopology distance_to_affinity(const GraphTopology& topology);

// Reads a `from,to,cost` CSV. node_count overrides the 1 + max id inference.
GraphTopology load_adjacency_csv(const std::filesystem::path& path,
                                 std::optional<std::size_t> node_count = std::nullopt);
GraphTopology parse_adjacency_csv(const std::string& text,
                                  std::optional<std::size_t> node_count = std::nullopt);
std::string format_adjacency_csv(const GraphTopology& topology);

}  // namespace msftgcn
