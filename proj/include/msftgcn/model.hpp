#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msftgcn/data.hpp"
#include "msftgcn/graph.hpp"
#include "msftgcn/mproduct.hpp"
#include "msftgcn/tape.hpp"
#include "msftgcn/tensor.hpp"

namespace msftgcn {

enum class Activation { relu, sigmoid, identity };
enum class SegmentKind : std::size_t { hourly = 0, daily = 1, weekly = 2 };

std::string_view segment_name(SegmentKind kind) noexcept;
SegmentKind parse_segment_kind(std::string_view name);

struct ModelConfig {
  std::size_t nodes = 4;
  std::size_t in_features = 1;
  std::size_t out_features = 1;
  std::size_t T_p = 4;
  std::size_t T_h = 4;
  std::size_t T_d = 4;
  std::size_t T_w = 4;
  std::size_t bandwidth = 2;  // shared by the three branches
  std::size_t layers = 2;
  std::size_t hidden_f = 16;
  std::size_t r = 4;           // AFF bottleneck ratio
  // The first two branches fuse first; the result then fuses with the third.
  std::array<SegmentKind, 3> fusion_order{SegmentKind::hourly, SegmentKind::daily,
                                          SegmentKind::weekly};

  void validate() const;
  std::size_t segment_length(SegmentKind kind) const noexcept;
  // ceil(hidden_f / r), at least 1.
  std::size_t bottleneck() const noexcept;
};

struct TmgcnLayerParams {
  DenseTensor3 W;  // F_in x F_out x T
  Activation activation = Activation::relu;
};

struct BranchParams {
  std::vector<TmgcnLayerParams> layers;
  DenseTensor3 projection;  // T_branch x T_p x 1
};

// Feature-mixing matrices stored as F_a x F_b x 1 tensors.
struct AffParams {
  DenseTensor3 global_down;  // F x F/r
  DenseTensor3 global_up;    // F/r x F
  DenseTensor3 local_down;
  DenseTensor3 local_up;
  // Test hook: replaces the attention map with this constant.
  std::optional<double> forced_weight;
};

struct ModelParams {
  std::array<BranchParams, 3> branches;  // indexed by SegmentKind
  std::array<AffParams, 2> fusion;
  DenseTensor3 head;  // hidden_f x F_out x 1

  // Visits every trainable tensor in a fixed order with a stable name.
  void visit(const std::function<void(const std::string&, DenseTensor3&)>& fn);
  void visit(const std::function<void(const std::string&, const DenseTensor3&)>& fn) const;
  std::vector<DenseTensor3*> tensors();
  std::vector<const DenseTensor3*> tensors() const;
  std::vector<std::string> names() const;
};

// Weights uniform(-s, s) with s = sqrt(6 / (F_in + F_out)) per slice; projections
// start as the averaging map.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);
ModelParams zeros_like(const ModelParams& params);

// Read-only constants shared by every forward pass.
struct ModelContext {
  ModelConfig config;
  std::array<MixingMatrix, 3> mixing;
  std::array<AdjacencyTensor, 3> adjacency;
  std::array<DenseTensor3, 3> adjacency_transformed;  // adjacency x3 M per branch
};

// `topology` carries final edge weights (affinity conversion happens upstream).
ModelContext make_context(const ModelConfig& config, const GraphTopology& topology);

// sigma_hat(A (.) X (.) W) with (.) the M-product and sigma applied in the
// transformed space. An identity activation skips the transform pair.
DenseTensor3 tmgcn_layer_forward(const DenseTensor3& X, const AdjacencyTensor& A,
                                 const TmgcnLayerParams& params, const MixingMatrix& M);

// result(i, j, s) = sum_t X(i, j, t) * P(t, s); P is T_branch x T_p (x 1).
DenseTensor3 temporal_project(const DenseTensor3& X, const DenseTensor3& P);

// H * X1 + (1 - H) * X2 with H = sigmoid(global(S) + local(S)), S = X1 + X2.
DenseTensor3 aff_fuse(const DenseTensor3& X1, const DenseTensor3& X2, const AffParams& params);

DenseTensor3 model_forward(const SegmentBatch& batch, const ModelContext& context,
                           const ModelParams& params);

// Tape-level building blocks. Every parameter passed in is already a tape node.
NodeRef tmgcn_layer_node(Tape& tape, NodeRef x, const DenseTensor3& adjacency_transformed,
                         NodeRef weight, Activation activation, const MixingMatrix& M);
NodeRef aff_fuse_node(Tape& tape, NodeRef x1, NodeRef x2, const std::array<NodeRef, 4>& weights,
                      std::optional<double> forced_weight);

struct ModelGraph {
  NodeRef output;
  std::vector<NodeRef> params;  // aligned with ModelParams::tensors()
};

// Builds the forward pass on `tape`; parameters become variables when
// `trainable` is true and constants otherwise.
ModelGraph build_model_graph(Tape& tape, const SegmentBatch& batch, const ModelContext& context,
                             const ModelParams& params, bool trainable);

// MSE of one batch and its gradient with respect to every parameter.
double loss_and_gradient(const SegmentBatch& batch, const ModelContext& context,
                         const ModelParams& params, ModelParams* gradient);

}  // namespace msftgcn
