#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "msftgcn/error.hpp"
#include "msftgcn/gradcheck.hpp"
#include "msftgcn/gradcheck_suite.hpp"
#include "msftgcn/tape.hpp"
#include "support.hpp"

using namespace msftgcn;
using testing::random_tensor;

TEST_CASE("gradient of a scaled sum is the scale") {
  Rng rng(1);
  const DenseTensor3 x = random_tensor({2, 3, 4}, rng);
  Tape tape;
  const NodeRef v = tape.variable(x);
  // mean * n == sum
  const double n = static_cast<double>(x.size());
  const NodeRef loss = tape.mean_over(tape.scale(v, 2.5 * n), {true, true, true});
  tape.backward(loss);
  for (double g : tape.grad(v).values()) CHECK(g == doctest::Approx(2.5));
}

TEST_CASE("mse gradient of a single element") {
  Tape tape;
  const NodeRef x = tape.variable(DenseTensor3({1, 1, 1}, std::vector<double>{2.0}));
  const NodeRef loss = tape.mse_loss(x, tape.constant(DenseTensor3({1, 1, 1})));
  CHECK(tape.scalar(loss) == 4.0);
  tape.backward(loss);
  CHECK(tape.grad(x)(0, 0, 0) == 4.0);
}

TEST_CASE("m_transform gradient applies the transpose") {
  Rng rng(4);
  const MixingMatrix m = banded_m(6, 3);
  const DenseTensor3 x = random_tensor({2, 2, 6}, rng);
  const DenseTensor3 r = random_tensor({2, 2, 6}, rng);
  Tape tape;
  const NodeRef v = tape.variable(x);
  const NodeRef y = tape.m_transform(v, m);
  const NodeRef loss = tape.mean_over(tape.hadamard(y, tape.constant(r)), {true, true, true});
  tape.backward(loss);
  const DenseTensor3 upstream = (1.0 / static_cast<double>(r.size())) * r;
  const DenseTensor3 want = testing::naive_mode3(upstream, testing::to_dense(m.entries_transposed()));
  CHECK(max_abs_diff(tape.grad(v), want) <= 1e-12);
}

TEST_CASE("fan-out accumulates gradients") {
  Tape tape;
  const NodeRef x = tape.variable(DenseTensor3({1, 1, 1}, std::vector<double>{3.0}));
  const NodeRef y = tape.add(tape.hadamard(x, x), x);  // x^2 + x
  tape.backward(y);
  CHECK(tape.grad(x)(0, 0, 0) == doctest::Approx(7.0));
}

TEST_CASE("tape contracts") {
  Tape tape;
  const NodeRef x = tape.variable(DenseTensor3({2, 1, 1}, 1.0));
  CHECK_THROWS_AS(tape.grad(x), ContractError);
  CHECK_THROWS_AS(tape.backward(x), ContractError);
  const NodeRef loss = tape.mean_over(x, {true, true, true});
  tape.backward(loss);
  const DenseTensor3 first = tape.grad(x);
  CHECK_THROWS_AS(tape.backward(loss), ContractError);
  CHECK(tape.grad(x) == first);
  const NodeRef c = tape.constant(DenseTensor3({1, 1, 1}));
  CHECK_THROWS_AS(tape.grad(c), ContractError);
}

TEST_CASE("non-finite values are reported with the node") {
  Tape tape;
  const NodeRef x = tape.variable(DenseTensor3({1, 1, 1}, std::vector<double>{1e300}));
  const NodeRef y = tape.hadamard(x, x);
  const NodeRef loss = tape.mean_over(y, {true, true, true});
  try {
    tape.backward(loss);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("tape node #") != std::string::npos);
  }
}

TEST_CASE("shape errors on op construction") {
  Tape tape;
  const NodeRef a = tape.variable(DenseTensor3({2, 2, 2}));
  const NodeRef b = tape.variable(DenseTensor3({2, 3, 2}));
  CHECK_THROWS_AS(tape.add(a, b), ShapeError);
  CHECK_THROWS_AS(tape.hadamard(a, b), ShapeError);
  CHECK_THROWS_AS(tape.facewise_product(b, b), ShapeError);
  CHECK_THROWS_AS(tape.broadcast(b, {2, 2, 2}), ShapeError);
  CHECK_THROWS_AS(tape.m_transform(a, banded_m(3, 1)), ShapeError);
}

TEST_CASE("stable sigmoid") {
  CHECK(stable_sigmoid(0.0) == 0.5);
  CHECK(stable_sigmoid(800.0) == 1.0);
  CHECK(stable_sigmoid(-800.0) >= 0.0);
  CHECK(std::isfinite(stable_sigmoid(-800.0)));
  CHECK(stable_sigmoid(2.0) + stable_sigmoid(-2.0) == doctest::Approx(1.0));
}

TEST_CASE("finite difference checker") {
  Rng rng(2);
  const DenseTensor3 x = random_tensor({2, 2, 2}, rng);
  const DifferentiableFn sum = [](const DenseTensor3& in, DenseTensor3* g) {
    double s = 0.0;
    for (double v : in.values()) s += v;
    if (g) *g = DenseTensor3(in.dims(), 1.0);
    return s;
  };
  const auto r1 = finite_diff_check("sum", sum, x, 1e-6, 8, 1e-10);
  CHECK(r1.pass);
  CHECK(r1.max_relative_error < 1e-10);
  CHECK(r1.probe_count == 8);

  const DifferentiableFn mse0 = [](const DenseTensor3& in, DenseTensor3* g) {
    const double n = static_cast<double>(in.size());
    double s = 0.0;
    for (double v : in.values()) s += v * v;
    if (g) *g = (2.0 / n) * in;
    return s / n;
  };
  CHECK(finite_diff_check("mse", mse0, x, 1e-6, 20, 1e-6).pass);

  const DifferentiableFn wrong = [&](const DenseTensor3& in, DenseTensor3* g) {
    const double v = mse0(in, g);
    if (g) *g = 3.0 * *g;
    return v;
  };
  const auto bad = finite_diff_check("wrong", wrong, x, 1e-6, 20, 1e-5);
  CHECK_FALSE(bad.pass);
  CHECK(bad.pass == (bad.max_relative_error < bad.tolerance));
}

TEST_CASE("every op vjp passes finite differences") {
  const auto reports = gradcheck_ops(GradCheckSettings{});
  CHECK(reports.size() >= 12);
  for (const auto& r : reports) {
    INFO(r.op_name << " " << r.max_relative_error);
    CHECK(r.pass);
    CHECK(r.tolerance == 1e-5);
    CHECK(r.probe_count == 20);
  }
}
