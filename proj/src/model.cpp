#include "msftgcn/model.hpp"

#include <algorithm>
#include <cmath>

#include "msftgcn/error.hpp"
#include "msftgcn/rng.hpp"

namespace msftgcn {

std::string_view segment_name(SegmentKind kind) noexcept {
  switch (kind) {
    case SegmentKind::hourly: return "hourly";
    case SegmentKind::daily: return "daily";
    case SegmentKind::weekly: return "weekly";
  }
  return "unknown";
}

SegmentKind parse_segment_kind(std::string_view name) {
  if (name == "hourly") return SegmentKind::hourly;
  if (name == "daily") return SegmentKind::daily;
  if (name == "weekly") return SegmentKind::weekly;
  throw ConfigError("unknown segment kind '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (nodes < 1) throw ConfigError("model needs at least one node");
  if (in_features < 1 || out_features < 1) throw ConfigError("feature counts must be >= 1");
  if (out_features > in_features) {
    throw ConfigError("out_features = " + std::to_string(out_features) +
                      " exceeds the input feature count " + std::to_string(in_features));
  }
  if (T_p < 1 || T_h < 1 || T_d < 1 || T_w < 1) throw ConfigError("segment lengths must be >= 1");
  if (layers < 1) throw ConfigError("each branch needs at least one layer");
  if (hidden_f < 1 || r < 1) throw ConfigError("hidden_f and r must be >= 1");
  const std::size_t shortest = std::min({T_h, T_d, T_w});
  if (bandwidth < 1 || bandwidth > shortest) {
    throw ConfigError("bandwidth " + std::to_string(bandwidth) + " outside the valid interval [1, " +
                      std::to_string(shortest) + "]");
  }
  std::array<bool, 3> seen{};
  for (SegmentKind k : fusion_order) {
    if (seen[static_cast<std::size_t>(k)]) throw ConfigError("fusion_order repeats a segment");
    seen[static_cast<std::size_t>(k)] = true;
  }
}

std::size_t ModelConfig::segment_length(SegmentKind kind) const noexcept {
  switch (kind) {
    case SegmentKind::hourly: return T_h;
    case SegmentKind::daily: return T_d;
    case SegmentKind::weekly: return T_w;
  }
  return 0;
}

std::size_t ModelConfig::bottleneck() const noexcept { return std::max<std::size_t>(1, (hidden_f + r - 1) / r); }

void ModelParams::visit(const std::function<void(const std::string&, DenseTensor3&)>& fn) {
  for (std::size_t b = 0; b < 3; ++b) {
    const std::string prefix(segment_name(static_cast<SegmentKind>(b)));
    for (std::size_t l = 0; l < branches[b].layers.size(); ++l) {
      fn(prefix + ".layer" + std::to_string(l) + ".W", branches[b].layers[l].W);
    }
    fn(prefix + ".projection", branches[b].projection);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    const std::string prefix = "fusion" + std::to_string(s);
    fn(prefix + ".global_down", fusion[s].global_down);
    fn(prefix + ".global_up", fusion[s].global_up);
    fn(prefix + ".local_down", fusion[s].local_down);
    fn(prefix + ".local_up", fusion[s].local_up);
  }
  fn("head", head);
}

void ModelParams::visit(
    const std::function<void(const std::string&, const DenseTensor3&)>& fn) const {
  const_cast<ModelParams*>(this)->visit(
      [&](const std::string& name, DenseTensor3& t) { fn(name, t); });
}

std::vector<DenseTensor3*> ModelParams::tensors() {
  std::vector<DenseTensor3*> out;
  visit([&](const std::string&, DenseTensor3& t) { out.push_back(&t); });
  return out;
}

std::vector<const DenseTensor3*> ModelParams::tensors() const {
  std::vector<const DenseTensor3*> out;
  visit([&](const std::string&, const DenseTensor3& t) { out.push_back(&t); });
  return out;
}

std::vector<std::string> ModelParams::names() const {
  std::vector<std::string> out;
  visit([&](const std::string& name, const DenseTensor3&) { out.push_back(name); });
  return out;
}

namespace {

DenseTensor3 uniform_tensor(Dims3 dims, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  DenseTensor3 t(dims);
  for (double& v : t.values()) v = rng.uniform(-s, s);
  return t;
}

}  // namespace

ModelParams init_params(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  ModelParams p;
  for (std::size_t b = 0; b < 3; ++b) {
    const std::size_t T = c.segment_length(static_cast<SegmentKind>(b));
    auto& branch = p.branches[b];
    for (std::size_t l = 0; l < c.layers; ++l) {
      const std::size_t f_in = l == 0 ? c.in_features : c.hidden_f;
      TmgcnLayerParams layer;
      layer.W = uniform_tensor({f_in, c.hidden_f, T}, f_in, c.hidden_f, rng);
      layer.activation = (l + 1 == c.layers) ? Activation::identity : Activation::relu;
      branch.layers.push_back(std::move(layer));
    }
    branch.projection = DenseTensor3({T, c.T_p, 1}, 1.0 / static_cast<double>(T));
  }
  const std::size_t f = c.hidden_f;
  const std::size_t fr = c.bottleneck();
  for (auto& aff : p.fusion) {
    aff.global_down = uniform_tensor({f, fr, 1}, f, fr, rng);
    aff.global_up = uniform_tensor({fr, f, 1}, fr, f, rng);
    aff.local_down = uniform_tensor({f, fr, 1}, f, fr, rng);
    aff.local_up = uniform_tensor({fr, f, 1}, fr, f, rng);
  }
  p.head = uniform_tensor({f, c.out_features, 1}, f, c.out_features, rng);
  return p;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  z.visit([](const std::string&, DenseTensor3& t) { t = DenseTensor3(t.dims()); });
  return z;
}

ModelContext make_context(const ModelConfig& config, const GraphTopology& topology) {
  config.validate();
  if (topology.node_count != config.nodes) {
    throw ConfigError("graph has " + std::to_string(topology.node_count) +
                      " nodes, model expects " + std::to_string(config.nodes));
  }
  const std::array<SegmentKind, 3> kinds{SegmentKind::hourly, SegmentKind::daily,
                                         SegmentKind::weekly};
  auto build = [&](SegmentKind k) { return banded_m(config.segment_length(k), config.bandwidth); };
  ModelContext ctx{config,
                   {build(kinds[0]), build(kinds[1]), build(kinds[2])},
                   {},
                   {}};
  for (std::size_t b = 0; b < 3; ++b) {
    ctx.adjacency[b] = build_adjacency_tensor(topology, config.segment_length(kinds[b]));
    ctx.adjacency_transformed[b] = m_transform(ctx.adjacency[b].tensor, ctx.mixing[b]);
  }
  return ctx;
}

namespace {

void check_layer_shapes(const Dims3& x, const Dims3& a, const Dims3& w, std::size_t T) {
  if (a.d1 != x.d1 || a.d2 != x.d1 || a.d3 != T || x.d3 != T || w.d1 != x.d2 || w.d3 != T) {
    throw ShapeError("tmgcn layer: X " + to_string(x) + ", A " + to_string(a) + ", W " +
                     to_string(w) + " with T = " + std::to_string(T));
  }
}

}  // namespace

DenseTensor3 tmgcn_layer_forward(const DenseTensor3& X, const AdjacencyTensor& A,
                                 const TmgcnLayerParams& params, const MixingMatrix& M) {
  if (!A.normalized) throw ContractError("tmgcn layer needs a normalized adjacency tensor");
  check_layer_shapes(X.dims(), A.tensor.dims(), params.W.dims(), M.T());
  const DenseTensor3 pre = m_product(m_product(A.tensor, X, M), params.W, M);
  if (params.activation == Activation::identity) return pre;
  DenseTensor3 z = m_transform(pre, M);
  for (double& v : z.values()) {
    v = params.activation == Activation::relu ? (v > 0.0 ? v : 0.0) : stable_sigmoid(v);
  }
  return m_transform_inverse(z, M);
}

NodeRef tmgcn_layer_node(Tape& tape, NodeRef x, const DenseTensor3& adjacency_transformed,
                         NodeRef weight, Activation activation, const MixingMatrix& M) {
  check_layer_shapes(tape.value(x).dims(), adjacency_transformed.dims(), tape.value(weight).dims(),
                     M.T());
  const NodeRef a_t = tape.constant(adjacency_transformed);
  // A (.) X
  const NodeRef ax = tape.m_transform_inverse(
      tape.facewise_product(a_t, tape.m_transform(x, M)), M);
  // (A (.) X) (.) W
  NodeRef pre = tape.m_transform_inverse(
      tape.facewise_product(tape.m_transform(ax, M), tape.m_transform(weight, M)), M);
  if (activation == Activation::identity) return pre;
  NodeRef z = tape.m_transform(pre, M);
  z = activation == Activation::relu ? tape.relu(z) : tape.sigmoid(z);
  return tape.m_transform_inverse(z, M);
}

DenseTensor3 temporal_project(const DenseTensor3& X, const DenseTensor3& P) {
  Tape tape;
  const NodeRef x = tape.constant(X);
  const NodeRef p = tape.constant(P);
  return tape.value(tape.temporal_project(x, p));
}

NodeRef aff_fuse_node(Tape& tape, NodeRef x1, NodeRef x2, const std::array<NodeRef, 4>& w,
                      std::optional<double> forced_weight) {
  const Dims3 d = tape.value(x1).dims();
  if (tape.value(x2).dims() != d) {
    throw ShapeError("aff_fuse: dims " + to_string(d) + " and " + to_string(tape.value(x2).dims()));
  }
  NodeRef h;
  if (forced_weight) {
    h = tape.constant(DenseTensor3(d, *forced_weight));
  } else {
    const NodeRef s = tape.add(x1, x2);
    const std::size_t fr = tape.value(w[0]).dims().d2;
    // Global context: per-feature mean over nodes and time.
    const NodeRef g = tape.mean_over(s, {true, false, true});
    const NodeRef g_mid = tape.relu(tape.facewise_product(g, w[0]));
    const NodeRef g_out = tape.broadcast(tape.facewise_product(g_mid, w[1]), d);
    // Local context: the same bottleneck applied at every (node, step).
    const NodeRef down = tape.broadcast(w[2], {d.d2, fr, d.d3});
    const NodeRef up = tape.broadcast(w[3], {fr, d.d2, d.d3});
    const NodeRef l_out =
        tape.facewise_product(tape.relu(tape.facewise_product(s, down)), up);
    h = tape.sigmoid(tape.add(g_out, l_out));
  }
  const NodeRef one_minus_h = tape.scale(h, -1.0, 1.0);
  return tape.add(tape.hadamard(h, x1), tape.hadamard(one_minus_h, x2));
}

DenseTensor3 aff_fuse(const DenseTensor3& X1, const DenseTensor3& X2, const AffParams& params) {
  Tape tape;
  const NodeRef x1 = tape.constant(X1);
  const NodeRef x2 = tape.constant(X2);
  const std::array<NodeRef, 4> w{tape.constant(params.global_down), tape.constant(params.global_up),
                                 tape.constant(params.local_down), tape.constant(params.local_up)};
  return tape.value(aff_fuse_node(tape, x1, x2, w, params.forced_weight));
}

ModelGraph build_model_graph(Tape& tape, const SegmentBatch& batch, const ModelContext& ctx,
                             const ModelParams& params, bool trainable) {
  const ModelConfig& c = ctx.config;
  ModelGraph graph;
  for (const DenseTensor3* t : params.tensors()) {
    graph.params.push_back(trainable ? tape.variable(*t) : tape.constant(*t));
  }
  std::size_t next = 0;
  const auto take = [&]() { return graph.params.at(next++); };

  const std::array<const DenseTensor3*, 3> inputs{&batch.hourly, &batch.daily, &batch.weekly};
  std::array<NodeRef, 3> branch_out{};
  for (std::size_t b = 0; b < 3; ++b) {
    const std::size_t T = c.segment_length(static_cast<SegmentKind>(b));
    const Dims3 expected{c.nodes, c.in_features, T};
    if (inputs[b]->dims() != expected) {
      throw ShapeError(std::string(segment_name(static_cast<SegmentKind>(b))) +
                       " segment has dims " + to_string(inputs[b]->dims()) + ", branch expects " +
                       to_string(expected));
    }
    const auto& branch = params.branches[b];
    if (branch.layers.size() != c.layers) throw ShapeError("branch layer count mismatch");
    NodeRef x = tape.constant(*inputs[b]);
    for (const auto& layer : branch.layers) {
      x = tmgcn_layer_node(tape, x, ctx.adjacency_transformed[b], take(), layer.activation,
                           ctx.mixing[b]);
    }
    branch_out[b] = tape.temporal_project(x, take());
  }
  std::array<NodeRef, 2> fused{};
  for (std::size_t s = 0; s < 2; ++s) {
    const std::array<NodeRef, 4> w{take(), take(), take(), take()};
    const NodeRef lhs =
        s == 0 ? branch_out[static_cast<std::size_t>(c.fusion_order[0])] : fused[0];
    const NodeRef rhs = branch_out[static_cast<std::size_t>(c.fusion_order[s + 1])];
    fused[s] = aff_fuse_node(tape, lhs, rhs, w, params.fusion[s].forced_weight);
  }
  const NodeRef head = take();
  const Dims3 hd = tape.value(head).dims();
  graph.output = tape.facewise_product(fused[1], tape.broadcast(head, {hd.d1, hd.d2, c.T_p}));
  return graph;
}

DenseTensor3 model_forward(const SegmentBatch& batch, const ModelContext& context,
                           const ModelParams& params) {
  Tape tape;
  const ModelGraph g = build_model_graph(tape, batch, context, params, false);
  return tape.value(g.output);
}

double loss_and_gradient(const SegmentBatch& batch, const ModelContext& context,
                         const ModelParams& params, ModelParams* gradient) {
  Tape tape;
  const ModelGraph g = build_model_graph(tape, batch, context, params, gradient != nullptr);
  const NodeRef target = tape.constant(batch.target);
  if (tape.value(g.output).dims() != batch.target.dims()) {
    throw ShapeError("prediction " + to_string(tape.value(g.output).dims()) + " vs target " +
                     to_string(batch.target.dims()));
  }
  const NodeRef loss = tape.mse_loss(g.output, target);
  const double value = tape.scalar(loss);
  if (gradient) {
    tape.backward(loss);
    *gradient = zeros_like(params);
    auto slots = gradient->tensors();
    for (std::size_t k = 0; k < slots.size(); ++k) *slots[k] = tape.grad(g.params[k]);
  }
  return value;
}

}  // namespace msftgcn
