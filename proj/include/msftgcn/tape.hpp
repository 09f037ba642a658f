#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string_view>
#include <vector>

#include "msftgcn/mproduct.hpp"
#include "msftgcn/tensor.hpp"

namespace msftgcn {

enum class OpKind {
  leaf,
  m_transform,
  facewise_product,
  add,
  hadamard,
  scalar_scale,
  sigmoid,
  relu,
  global_mean,
  broadcast,
  temporal_projection,
  mse_loss,
};

std::string_view op_name(OpKind kind) noexcept;

struct NodeRef {
  std::size_t index = 0;
  friend bool operator==(NodeRef, NodeRef) = default;
};

double stable_sigmoid(double x) noexcept;

// Reverse-mode tape over the closed set of ops the forecaster needs. Nodes are
// appended in evaluation order, so the vector itself is a topological order.
// A tape is single-use: build, run backward once, read gradients.
class Tape {
 public:
  // Leaf with a gradient slot.
  NodeRef variable(DenseTensor3 value);
  // Leaf without a gradient slot.
  NodeRef constant(DenseTensor3 value);

  // y = x x3 m. Backward applies m^T, which callers pass in precomputed.
  NodeRef m_transform(NodeRef x, std::shared_ptr<const Matrix> m,
                      std::shared_ptr<const Matrix> m_transposed);
  NodeRef m_transform(NodeRef x, const MixingMatrix& m);
  NodeRef m_transform_inverse(NodeRef x, const MixingMatrix& m);

  NodeRef facewise_product(NodeRef a, NodeRef b);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef hadamard(NodeRef a, NodeRef b);
  // y = alpha * x + offset
  NodeRef scale(NodeRef x, double alpha, double offset = 0.0);
  NodeRef sigmoid(NodeRef x);
  NodeRef relu(NodeRef x);
  // Mean over the flagged axes; reduced axes keep extent 1.
  NodeRef mean_over(NodeRef x, std::array<bool, 3> axes);
  // Replicates along every axis whose extent is 1 in x and larger in target.
  NodeRef broadcast(NodeRef x, Dims3 target);
  // y(i, j, s) = sum_t x(i, j, t) * p(t, s, 0); p has dims T_in x T_out x 1.
  NodeRef temporal_project(NodeRef x, NodeRef p);
  // Mean of squared differences; 1x1x1 result.
  NodeRef mse_loss(NodeRef pred, NodeRef target);

  const DenseTensor3& value(NodeRef n) const;
  double scalar(NodeRef n) const;
  OpKind kind(NodeRef n) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Accumulates d(loss)/d(node) for every node that depends on a variable.
  // Throws ContractError on a non-scalar loss or a second call, and
  // NumericalError naming the node when a non-finite gradient appears.
  void backward(NodeRef loss);
  bool has_run_backward() const noexcept { return backward_done_; }

  // Gradient of a variable (or any intermediate that requires grad). Zeros
  // when the node did not influence the loss.
  const DenseTensor3& grad(NodeRef n) const;

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::array<std::size_t, 2> inputs{};
    std::size_t arity = 0;
    bool requires_grad = false;
    DenseTensor3 value;
    DenseTensor3 grad;
    std::shared_ptr<const Matrix> matrix;
    std::shared_ptr<const Matrix> matrix_t;
    double alpha = 1.0;
    double offset = 0.0;
    std::array<bool, 3> axes{};
  };

  NodeRef push(Node node);
  const Node& at(NodeRef n) const;
  void accumulate(std::size_t index, const DenseTensor3& g);
  void backprop_node(std::size_t index);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace msftgcn
