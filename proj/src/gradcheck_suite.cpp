#include "msftgcn/gradcheck_suite.hpp"

#include <functional>

#include "msftgcn/model.hpp"
#include "msftgcn/pipeline.hpp"
#include "msftgcn/rng.hpp"
#include "msftgcn/tape.hpp"

namespace msftgcn {
namespace {

DenseTensor3 random_tensor(Dims3 dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  DenseTensor3 t(dims);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

using Builder = std::function<NodeRef(Tape&, NodeRef)>;

// Scalarizes y = build(x) as mean(R * y) with a fixed random R.
GradCheckReport check_op(const std::string& name, const DenseTensor3& x, const Builder& build,
                         const GradCheckSettings& s, Rng& rng) {
  Dims3 out_dims;
  {
    Tape probe;
    out_dims = probe.value(build(probe, probe.constant(x))).dims();
  }
  const DenseTensor3 weights = random_tensor(out_dims, rng);
  const DifferentiableFn f = [&](const DenseTensor3& in, DenseTensor3* grad) {
    Tape tape;
    const NodeRef xv = grad ? tape.variable(in) : tape.constant(in);
    const NodeRef y = build(tape, xv);
    const NodeRef loss = tape.mean_over(tape.hadamard(y, tape.constant(weights)), {true, true, true});
    const double value = tape.scalar(loss);
    if (grad) {
      tape.backward(loss);
      *grad = tape.grad(xv);
    }
    return value;
  };
  return finite_diff_check(name, f, x, s.h, s.probes, s.op_tolerance, rng.next_u64());
}

}  // namespace

std::vector<GradCheckReport> gradcheck_ops(const GradCheckSettings& s) {
  Rng rng(s.seed);
  std::vector<GradCheckReport> out;
  const MixingMatrix m5 = banded_m(5, 3);
  const DenseTensor3 x = random_tensor({2, 3, 5}, rng);

  out.push_back(check_op("m_transform", x,
                         [&](Tape& t, NodeRef v) { return t.m_transform(v, m5); }, s, rng));
  out.push_back(check_op("m_transform_inverse", x,
                         [&](Tape& t, NodeRef v) { return t.m_transform_inverse(v, m5); }, s, rng));

  const DenseTensor3 rhs = random_tensor({3, 2, 5}, rng);
  const DenseTensor3 lhs = random_tensor({4, 2, 5}, rng);
  out.push_back(check_op("facewise_product[lhs]", x,
                         [&](Tape& t, NodeRef v) { return t.facewise_product(v, t.constant(rhs)); },
                         s, rng));
  out.push_back(check_op("facewise_product[rhs]", x,
                         [&](Tape& t, NodeRef v) { return t.facewise_product(t.constant(lhs), v); },
                         s, rng));

  const DenseTensor3 other = random_tensor(x.dims(), rng);
  out.push_back(check_op("add", x, [&](Tape& t, NodeRef v) { return t.add(v, t.constant(other)); },
                         s, rng));
  out.push_back(check_op("hadamard", x,
                         [&](Tape& t, NodeRef v) { return t.hadamard(v, t.constant(other)); }, s,
                         rng));
  out.push_back(check_op("scalar_scale", x,
                         [&](Tape& t, NodeRef v) { return t.scale(v, -1.7, 0.3); }, s, rng));
  out.push_back(check_op("sigmoid", random_tensor(x.dims(), rng, -4.0, 4.0),
                         [&](Tape& t, NodeRef v) { return t.sigmoid(v); }, s, rng));
  out.push_back(check_op("relu", x, [&](Tape& t, NodeRef v) { return t.relu(v); }, s, rng));
  out.push_back(check_op("global_mean", x,
                         [&](Tape& t, NodeRef v) { return t.mean_over(v, {true, false, true}); }, s,
                         rng));
  out.push_back(check_op("broadcast", random_tensor({1, 3, 1}, rng),
                         [&](Tape& t, NodeRef v) { return t.broadcast(v, {2, 3, 4}); }, s, rng));

  const DenseTensor3 proj = random_tensor({5, 2, 1}, rng);
  out.push_back(check_op("temporal_projection[x]", x,
                         [&](Tape& t, NodeRef v) { return t.temporal_project(v, t.constant(proj)); },
                         s, rng));
  out.push_back(check_op("temporal_projection[P]", proj,
                         [&](Tape& t, NodeRef v) { return t.temporal_project(t.constant(x), v); },
                         s, rng));

  {
    const DenseTensor3 target = random_tensor(x.dims(), rng);
    const DifferentiableFn f = [&](const DenseTensor3& in, DenseTensor3* grad) {
      Tape tape;
      const NodeRef xv = tape.variable(in);
      const NodeRef loss = tape.mse_loss(xv, tape.constant(target));
      const double value = tape.scalar(loss);
      if (grad) {
        tape.backward(loss);
        *grad = tape.grad(xv);
      }
      return value;
    };
    out.push_back(finite_diff_check("mse_loss", f, x, s.h, s.probes, s.op_tolerance, rng.next_u64()));
  }

  // One TM-GCN layer, N=2, F=2, T=3, b=2.
  {
    const MixingMatrix m3 = banded_m(3, 2);
    GraphTopology g{2, {{0, 1, 1.0}}};
    const AdjacencyTensor a = build_adjacency_tensor(g, 3);
    const DenseTensor3 a_t = m_transform(a.tensor, m3);
    const DenseTensor3 feats = random_tensor({2, 2, 3}, rng);
    const DenseTensor3 w = random_tensor({2, 2, 3}, rng);
    out.push_back(check_op("tmgcn_layer[W]", w,
                           [&](Tape& t, NodeRef v) {
                             return tmgcn_layer_node(t, t.constant(feats), a_t, v,
                                                     Activation::relu, m3);
                           },
                           s, rng));
    out.push_back(check_op("tmgcn_layer[X]", feats,
                           [&](Tape& t, NodeRef v) {
                             return tmgcn_layer_node(t, v, a_t, t.constant(w),
                                                     Activation::sigmoid, m3);
                           },
                           s, rng));
  }

  // AFF with F=4, r=2.
  {
    const DenseTensor3 x1 = random_tensor({3, 4, 2}, rng);
    const DenseTensor3 x2 = random_tensor({3, 4, 2}, rng);
    const std::array<DenseTensor3, 4> w{random_tensor({4, 2, 1}, rng), random_tensor({2, 4, 1}, rng),
                                        random_tensor({4, 2, 1}, rng), random_tensor({2, 4, 1}, rng)};
    out.push_back(check_op("aff_fuse[X1]", x1,
                           [&](Tape& t, NodeRef v) {
                             const std::array<NodeRef, 4> wn{t.constant(w[0]), t.constant(w[1]),
                                                             t.constant(w[2]), t.constant(w[3])};
                             return aff_fuse_node(t, v, t.constant(x2), wn, std::nullopt);
                           },
                           s, rng));
    out.push_back(check_op("aff_fuse[local_down]", w[2],
                           [&](Tape& t, NodeRef v) {
                             const std::array<NodeRef, 4> wn{t.constant(w[0]), t.constant(w[1]), v,
                                                             t.constant(w[3])};
                             return aff_fuse_node(t, t.constant(x1), t.constant(x2), wn,
                                                  std::nullopt);
                           },
                           s, rng));
  }
  return out;
}

std::vector<GradCheckReport> gradcheck_model(const ExperimentConfig& config,
                                             const GradCheckSettings& s) {
  const PreparedExperiment e = prepare_experiment(config);
  const ModelParams params = initial_params(e);
  const SegmentBatch& batch = e.train.front();
  const auto names = params.names();
  Rng rng(s.seed);
  std::vector<GradCheckReport> out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const DifferentiableFn f = [&](const DenseTensor3& in, DenseTensor3* grad) {
      ModelParams p = params;
      *p.tensors()[k] = in;
      if (!grad) return loss_and_gradient(batch, e.context, p, nullptr);
      ModelParams g;
      const double value = loss_and_gradient(batch, e.context, p, &g);
      *grad = *std::as_const(g).tensors()[k];
      return value;
    };
    out.push_back(finite_diff_check("model:" + names[k], f, *params.tensors()[k], s.h, s.probes,
                                    s.model_tolerance, rng.next_u64()));
  }
  return out;
}

}  // namespace msftgcn
