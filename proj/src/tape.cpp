#include "msftgcn/tape.hpp"

#include <cmath>
#include <string>

#include "msftgcn/error.hpp"

namespace msftgcn {

std::string_view op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::m_transform: return "m_transform";
    case OpKind::facewise_product: return "facewise_product";
    case OpKind::add: return "add";
    case OpKind::hadamard: return "hadamard";
    case OpKind::scalar_scale: return "scalar_scale";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::global_mean: return "global_mean";
    case OpKind::broadcast: return "broadcast";
    case OpKind::temporal_projection: return "temporal_projection";
    case OpKind::mse_loss: return "mse_loss";
  }
  return "unknown";
}

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void require_same_dims(const DenseTensor3& a, const DenseTensor3& b, std::string_view op) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(op) + ": dims " + to_string(a.dims()) + " and " +
                     to_string(b.dims()) + " differ");
  }
}

}  // namespace

NodeRef Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeRef{nodes_.size() - 1};
}

const Tape::Node& Tape::at(NodeRef n) const {
  if (n.index >= nodes_.size()) throw ContractError("tape node reference out of range");
  return nodes_[n.index];
}

NodeRef Tape::variable(DenseTensor3 value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

NodeRef Tape::constant(DenseTensor3 value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeRef Tape::m_transform(NodeRef x, std::shared_ptr<const Matrix> m,
                          std::shared_ptr<const Matrix> m_transposed) {
  const Node& in = at(x);
  Node n;
  n.kind = OpKind::m_transform;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = in.requires_grad;
  n.value = msftgcn::m_transform(in.value, *m);
  if (!m_transposed) m_transposed = std::make_shared<const Matrix>(m->transposed());
  n.matrix = std::move(m);
  n.matrix_t = std::move(m_transposed);
  return push(std::move(n));
}

NodeRef Tape::m_transform(NodeRef x, const MixingMatrix& m) {
  return m_transform(x, m.shared_entries(), m.shared_entries_transposed());
}

NodeRef Tape::m_transform_inverse(NodeRef x, const MixingMatrix& m) {
  return m_transform(x, m.shared_inverse(), m.shared_inverse_transposed());
}

NodeRef Tape::facewise_product(NodeRef a, NodeRef b) {
  Node n;
  n.kind = OpKind::facewise_product;
  n.inputs = {a.index, b.index};
  n.arity = 2;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = msftgcn::facewise_product(at(a).value, at(b).value);
  return push(std::move(n));
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  require_same_dims(at(a).value, at(b).value, "add");
  Node n;
  n.kind = OpKind::add;
  n.inputs = {a.index, b.index};
  n.arity = 2;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = at(a).value + at(b).value;
  return push(std::move(n));
}

NodeRef Tape::hadamard(NodeRef a, NodeRef b) {
  const auto& va = at(a).value;
  const auto& vb = at(b).value;
  require_same_dims(va, vb, "hadamard");
  Node n;
  n.kind = OpKind::hadamard;
  n.inputs = {a.index, b.index};
  n.arity = 2;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = DenseTensor3(va.dims());
  for (std::size_t k = 0; k < va.size(); ++k) n.value.values()[k] = va.values()[k] * vb.values()[k];
  return push(std::move(n));
}

NodeRef Tape::scale(NodeRef x, double alpha, double offset) {
  const auto& vx = at(x).value;
  Node n;
  n.kind = OpKind::scalar_scale;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = at(x).requires_grad;
  n.alpha = alpha;
  n.offset = offset;
  n.value = DenseTensor3(vx.dims());
  for (std::size_t k = 0; k < vx.size(); ++k) n.value.values()[k] = alpha * vx.values()[k] + offset;
  return push(std::move(n));
}

NodeRef Tape::sigmoid(NodeRef x) {
  const auto& vx = at(x).value;
  Node n;
  n.kind = OpKind::sigmoid;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = at(x).requires_grad;
  n.value = DenseTensor3(vx.dims());
  for (std::size_t k = 0; k < vx.size(); ++k) n.value.values()[k] = stable_sigmoid(vx.values()[k]);
  return push(std::move(n));
}

NodeRef Tape::relu(NodeRef x) {
  const auto& vx = at(x).value;
  Node n;
  n.kind = OpKind::relu;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = at(x).requires_grad;
  n.value = DenseTensor3(vx.dims());
  for (std::size_t k = 0; k < vx.size(); ++k) {
    n.value.values()[k] = vx.values()[k] > 0.0 ? vx.values()[k] : 0.0;
  }
  return push(std::move(n));
}

NodeRef Tape::mean_over(NodeRef x, std::array<bool, 3> axes) {
  const auto& vx = at(x).value;
  const Dims3 d = vx.dims();
  const Dims3 out_dims{axes[0] ? 1 : d.d1, axes[1] ? 1 : d.d2, axes[2] ? 1 : d.d3};
  const double count = static_cast<double>((axes[0] ? d.d1 : 1) * (axes[1] ? d.d2 : 1) *
                                           (axes[2] ? d.d3 : 1));
  Node n;
  n.kind = OpKind::global_mean;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = at(x).requires_grad;
  n.axes = axes;
  n.value = DenseTensor3(out_dims);
  for (std::size_t i = 0; i < d.d1; ++i)
    for (std::size_t j = 0; j < d.d2; ++j)
      for (std::size_t t = 0; t < d.d3; ++t)
        n.value(axes[0] ? 0 : i, axes[1] ? 0 : j, axes[2] ? 0 : t) += vx(i, j, t);
  n.value *= 1.0 / count;
  return push(std::move(n));
}

NodeRef Tape::broadcast(NodeRef x, Dims3 target) {
  const auto& vx = at(x).value;
  const Dims3 d = vx.dims();
  const auto compatible = [](std::size_t from, std::size_t to) { return from == to || from == 1; };
  if (!compatible(d.d1, target.d1) || !compatible(d.d2, target.d2) ||
      !compatible(d.d3, target.d3)) {
    throw ShapeError("broadcast: cannot expand " + to_string(d) + " to " + to_string(target));
  }
  Node n;
  n.kind = OpKind::broadcast;
  n.inputs = {x.index, 0};
  n.arity = 1;
  n.requires_grad = at(x).requires_grad;
  n.value = DenseTensor3(target);
  for (std::size_t i = 0; i < target.d1; ++i)
    for (std::size_t j = 0; j < target.d2; ++j)
      for (std::size_t t = 0; t < target.d3; ++t)
        n.value(i, j, t) = vx(d.d1 == 1 ? 0 : i, d.d2 == 1 ? 0 : j, d.d3 == 1 ? 0 : t);
  return push(std::move(n));
}

NodeRef Tape::temporal_project(NodeRef x, NodeRef p) {
  const auto& vx = at(x).value;
  const auto& vp = at(p).value;
  const Dims3 d = vx.dims();
  if (vp.dims().d1 != d.d3 || vp.dims().d3 != 1) {
    throw ShapeError("temporal_project: input " + to_string(d) + " against projection " +
                     to_string(vp.dims()));
  }
  const std::size_t t_out = vp.dims().d2;
  Node n;
  n.kind = OpKind::temporal_projection;
  n.inputs = {x.index, p.index};
  n.arity = 2;
  n.requires_grad = at(x).requires_grad || at(p).requires_grad;
  n.value = DenseTensor3({d.d1, d.d2, t_out});
  for (std::size_t i = 0; i < d.d1; ++i)
    for (std::size_t j = 0; j < d.d2; ++j)
      for (std::size_t t = 0; t < d.d3; ++t) {
        const double xv = vx(i, j, t);
        for (std::size_t s = 0; s < t_out; ++s) n.value(i, j, s) += xv * vp(t, s, 0);
      }
  return push(std::move(n));
}

NodeRef Tape::mse_loss(NodeRef pred, NodeRef target) {
  const auto& vp = at(pred).value;
  const auto& vt = at(target).value;
  require_same_dims(vp, vt, "mse_loss");
  if (vp.size() == 0) throw ShapeError("mse_loss: empty tensors");
  double sum = 0.0;
  for (std::size_t k = 0; k < vp.size(); ++k) {
    const double e = vp.values()[k] - vt.values()[k];
    sum += e * e;
  }
  Node n;
  n.kind = OpKind::mse_loss;
  n.inputs = {pred.index, target.index};
  n.arity = 2;
  n.requires_grad = at(pred).requires_grad || at(target).requires_grad;
  n.value = DenseTensor3({1, 1, 1}, sum / static_cast<double>(vp.size()));
  return push(std::move(n));
}

const DenseTensor3& Tape::value(NodeRef n) const { return at(n).value; }

double Tape::scalar(NodeRef n) const {
  const auto& v = at(n).value;
  if (v.size() != 1) throw ContractError("node is not a scalar: dims " + to_string(v.dims()));
  return v.values()[0];
}

OpKind Tape::kind(NodeRef n) const { return at(n).kind; }

const DenseTensor3& Tape::grad(NodeRef n) const {
  const Node& node = at(n);
  if (!backward_done_) throw ContractError("gradients requested before backward");
  if (!node.requires_grad) throw ContractError("node does not carry a gradient");
  return node.grad;
}

void Tape::accumulate(std::size_t index, const DenseTensor3& g) {
  Node& node = nodes_[index];
  if (!node.requires_grad) return;
  node.grad += g;
}

void Tape::backward(NodeRef loss) {
  if (backward_done_) throw ContractError("backward already ran on this tape");
  const Node& root = at(loss);
  if (root.value.size() != 1) {
    throw ContractError("backward needs a scalar loss; got dims " + to_string(root.value.dims()));
  }
  for (auto& node : nodes_) {
    if (node.requires_grad) node.grad = DenseTensor3(node.value.dims());
  }
  backward_done_ = true;
  if (!root.requires_grad) return;
  nodes_[loss.index].grad.values()[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (!nodes_[i].requires_grad || nodes_[i].kind == OpKind::leaf) continue;
    if (!nodes_[i].grad.all_finite() || !nodes_[i].value.all_finite()) {
      throw NumericalError("non-finite value or gradient at tape node #" + std::to_string(i) +
                           " (" + std::string(op_name(nodes_[i].kind)) + ")");
    }
    backprop_node(i);
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    if (nodes_[i].requires_grad && nodes_[i].kind == OpKind::leaf && !nodes_[i].grad.all_finite()) {
      throw NumericalError("non-finite gradient at tape node #" + std::to_string(i) + " (leaf)");
    }
  }
}

void Tape::backprop_node(std::size_t index) {
  const Node& node = nodes_[index];
  const DenseTensor3& up = node.grad;
  const std::size_t a = node.inputs[0];
  const std::size_t b = node.inputs[1];

  switch (node.kind) {
    case OpKind::leaf:
      break;
    case OpKind::m_transform:
      accumulate(a, msftgcn::m_transform(up, *node.matrix_t));
      break;
    case OpKind::facewise_product: {
      const DenseTensor3& va = nodes_[a].value;
      const DenseTensor3& vb = nodes_[b].value;
      const Dims3 da = va.dims();
      const Dims3 db = vb.dims();
      if (nodes_[a].requires_grad) {
        DenseTensor3 ga(da);
        for (std::size_t i = 0; i < da.d1; ++i)
          for (std::size_t k = 0; k < da.d2; ++k)
            for (std::size_t j = 0; j < db.d2; ++j)
              for (std::size_t t = 0; t < da.d3; ++t) ga(i, k, t) += up(i, j, t) * vb(k, j, t);
        accumulate(a, ga);
      }
      if (nodes_[b].requires_grad) {
        DenseTensor3 gb(db);
        for (std::size_t i = 0; i < da.d1; ++i)
          for (std::size_t k = 0; k < da.d2; ++k)
            for (std::size_t j = 0; j < db.d2; ++j)
              for (std::size_t t = 0; t < da.d3; ++t) gb(k, j, t) += va(i, k, t) * up(i, j, t);
        accumulate(b, gb);
      }
      break;
    }
    case OpKind::add:
      accumulate(a, up);
      accumulate(b, up);
      break;
    case OpKind::hadamard: {
      const DenseTensor3& va = nodes_[a].value;
      const DenseTensor3& vb = nodes_[b].value;
      DenseTensor3 ga(up.dims());
      DenseTensor3 gb(up.dims());
      for (std::size_t k = 0; k < up.size(); ++k) {
        ga.values()[k] = up.values()[k] * vb.values()[k];
        gb.values()[k] = up.values()[k] * va.values()[k];
      }
      accumulate(a, ga);
      accumulate(b, gb);
      break;
    }
    case OpKind::scalar_scale: {
      DenseTensor3 g = up;
      g *= node.alpha;
      accumulate(a, g);
      break;
    }
    case OpKind::sigmoid: {
      DenseTensor3 g(up.dims());
      for (std::size_t k = 0; k < up.size(); ++k) {
        const double y = node.value.values()[k];
        g.values()[k] = y * (1.0 - y) * up.values()[k];
      }
      accumulate(a, g);
      break;
    }
    case OpKind::relu: {
      const DenseTensor3& vx = nodes_[a].value;
      DenseTensor3 g(up.dims());
      for (std::size_t k = 0; k < up.size(); ++k) {
        g.values()[k] = vx.values()[k] > 0.0 ? up.values()[k] : 0.0;
      }
      accumulate(a, g);
      break;
    }
    case OpKind::global_mean: {
      const Dims3 d = nodes_[a].value.dims();
      const auto& ax = node.axes;
      const double count =
          static_cast<double>((ax[0] ? d.d1 : 1) * (ax[1] ? d.d2 : 1) * (ax[2] ? d.d3 : 1));
      DenseTensor3 g(d);
      for (std::size_t i = 0; i < d.d1; ++i)
        for (std::size_t j = 0; j < d.d2; ++j)
          for (std::size_t t = 0; t < d.d3; ++t)
            g(i, j, t) = up(ax[0] ? 0 : i, ax[1] ? 0 : j, ax[2] ? 0 : t) / count;
      accumulate(a, g);
      break;
    }
    case OpKind::broadcast: {
      const Dims3 d = nodes_[a].value.dims();
      const Dims3 o = up.dims();
      DenseTensor3 g(d);
      for (std::size_t i = 0; i < o.d1; ++i)
        for (std::size_t j = 0; j < o.d2; ++j)
          for (std::size_t t = 0; t < o.d3; ++t)
            g(d.d1 == 1 ? 0 : i, d.d2 == 1 ? 0 : j, d.d3 == 1 ? 0 : t) += up(i, j, t);
      accumulate(a, g);
      break;
    }
    case OpKind::temporal_projection: {
      const DenseTensor3& vx = nodes_[a].value;
      const DenseTensor3& vp = nodes_[b].value;
      const Dims3 d = vx.dims();
      const std::size_t t_out = vp.dims().d2;
      DenseTensor3 gx(d);
      DenseTensor3 gp(vp.dims());
      for (std::size_t i = 0; i < d.d1; ++i)
        for (std::size_t j = 0; j < d.d2; ++j)
          for (std::size_t t = 0; t < d.d3; ++t)
            for (std::size_t s = 0; s < t_out; ++s) {
              gx(i, j, t) += up(i, j, s) * vp(t, s, 0);
              gp(t, s, 0) += vx(i, j, t) * up(i, j, s);
            }
      accumulate(a, gx);
      accumulate(b, gp);
      break;
    }
    case OpKind::mse_loss: {
      const DenseTensor3& vp = nodes_[a].value;
      const DenseTensor3& vt = nodes_[b].value;
      const double factor = 2.0 * up.values()[0] / static_cast<double>(vp.size());
      DenseTensor3 gp(vp.dims());
      for (std::size_t k = 0; k < vp.size(); ++k) {
        gp.values()[k] = factor * (vp.values()[k] - vt.values()[k]);
      }
      if (nodes_[b].requires_grad) accumulate(b, -1.0 * gp);
      accumulate(a, gp);
      break;
    }
  }
}

}  // namespace msftgcn
