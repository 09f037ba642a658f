#include "msftgcn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "msftgcn/error.hpp"

namespace msftgcn {

void GraphTopology::validate() const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.from >= node_count || edge.to >= node_count) {
      throw DataError("edge " + std::to_string(e) + " (" + std::to_string(edge.from) + "->" +
                      std::to_string(edge.to) + ") references a node id >= N = " +
                      std::to_string(node_count));
    }
    if (edge.from == edge.to) {
      throw DataError("edge " + std::to_string(e) + " is a self loop on node " +
                      std::to_string(edge.from));
    }
    if (!std::isfinite(edge.weight) || edge.weight < 0.0) {
      throw DataError("edge " + std::to_string(e) + " has invalid weight " +
                      std::to_string(edge.weight));
    }
  }
}

Matrix normalize_adjacency(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeError("adjacency matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = adjacency(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw DataError("adjacency entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") = " + std::to_string(w) + " must be finite and nonnegative");
      }
    }
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 1.0;  // the added self loop
    for (std::size_t j = 0; j < n; ++j) degree += adjacency(i, j);
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency(i, j) + (i == j ? 1.0 : 0.0);
      out(i, j) = a * (inv_sqrt_degree[i] * inv_sqrt_degree[j]);
    }
  return out;
}

Matrix densify(const GraphTopology& topology) {
  topology.validate();
  Matrix a(topology.node_count, topology.node_count);
  for (const Edge& e : topology.edges) {
    const double w = std::max(a(e.from, e.to), e.weight);
    a(e.from, e.to) = w;
    a(e.to, e.from) = w;
  }
  return a;
}

AdjacencyTensor build_adjacency_tensor(const GraphTopology& topology, std::size_t T) {
  if (T == 0) throw ParameterError("adjacency tensor needs T >= 1");
  const Matrix normalized = normalize_adjacency(densify(topology));
  const std::size_t n = topology.node_count;
  AdjacencyTensor out{DenseTensor3({n, n, T}), true};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < T; ++t) out.tensor(i, j, t) = normalized(i, j);
  return out;
}

GraphTopology distance_to_affinity(const GraphTopology& topology) {
  topology.validate();
  GraphTopology out = topology;
  if (topology.edges.empty()) return out;
  double mean = 0.0;
  for (const Edge& e : topology.edges) mean += e.weight;
  mean /= static_cast<double>(topology.edges.size());
  double var = 0.0;
  for (const Edge& e : topology.edges) var += (e.weight - mean) * (e.weight - mean);
  const double sigma = std::sqrt(var / static_cast<double>(topology.edges.size()));
  for (Edge& e : out.edges) {
    if (sigma == 0.0) {
      e.weight = 1.0;
    } else {
      const double z = e.weight / sigma;
      e.weight = std::exp(-z * z);
    }
  }
  return out;
}

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <class Number>
Number parse_field(std::string_view field, std::size_t line, const char* name) {
  Number value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError("adjacency CSV line " + std::to_string(line) + ": malformed " + name +
                     " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

GraphTopology parse_adjacency_csv(const std::string& text, std::optional<std::size_t> node_count) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  if (!std::getline(in, raw)) throw ParseError("adjacency CSV line 1: missing header");
  ++line;
  std::string_view header = trim_cr(raw);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != "from,to,cost") {
    throw ParseError("adjacency CSV line 1: expected header 'from,to,cost', got '" +
                     std::string(header) + "'");
  }

  GraphTopology topo;
  std::size_t max_id = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view row = trim_cr(raw);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError("adjacency CSV line " + std::to_string(line) +
                       ": expected 3 comma-separated fields");
    }
    Edge e;
    e.from = parse_field<std::size_t>(row.substr(0, c1), line, "from");
    e.to = parse_field<std::size_t>(row.substr(c1 + 1, c2 - c1 - 1), line, "to");
    e.weight = parse_field<double>(row.substr(c2 + 1), line, "cost");
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw DataError("adjacency CSV line " + std::to_string(line) + ": cost " +
                      std::string(row.substr(c2 + 1)) + " must be finite and nonnegative");
    }
    if (e.from == e.to) {
      throw DataError("adjacency CSV line " + std::to_string(line) + ": self loop on node " +
                      std::to_string(e.from));
    }
    max_id = std::max({max_id, e.from, e.to});
    topo.edges.push_back(e);
  }
  if (node_count) {
    topo.node_count = *node_count;
  } else {
    topo.node_count = topo.edges.empty() ? 0 : max_id + 1;
  }
  topo.validate();
  return topo;
}

GraphTopology load_adjacency_csv(const std::filesystem::path& path,
                                 std::optional<std::size_t> node_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open adjacency CSV " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_adjacency_csv(buf.str(), node_count);
}

std::string format_adjacency_csv(const GraphTopology& topology) {
  std::string out = "from,to,cost\n";
  char buf[64];
  for (const Edge& e : topology.edges) {
    const auto res = std::to_chars(buf, buf + sizeof buf, e.weight);
    out += std::to_string(e.from) + "," + std::to_string(e.to) + "," +
           std::string(buf, res.ptr) + "\n";
  }
  return out;
}

}  // namespace msftgcn
