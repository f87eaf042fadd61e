#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pad/autodiff.hpp"
#include "pad/errors.hpp"

using namespace pad;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = d(rng);
  return t;
}

// Max |tape - central difference| of d loss / d input over every coordinate.
double fd_error(std::vector<Tensor> inputs, const std::function<Var(Tape&, std::vector<Var>&)>& loss_fn,
                double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
  tape.backward(loss_fn(tape, vars));

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor g = tape.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> shifted = inputs;
        shifted[k][i] += delta;
        Tape t;
        std::vector<Var> v;
        for (const Tensor& s : shifted) v.push_back(t.constant(s));
        return loss_fn(t, v).value().item();
      };
      const double numeric = (eval(h) - eval(-h)) / (2 * h);
      worst = std::max(worst, std::abs(numeric - g[i]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul hand-evaluated product") {
  const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  const Tensor b = Tensor::from_rows({{0}, {1}});
  CHECK(matmul_raw(a, b) == Tensor::from_rows({{2}, {4}}));
  CHECK(matmul_raw(Tensor::identity(2), a) == a);
  CHECK_THROWS_AS(matmul_raw(a, Tensor(3, 1)), DimensionError);
}

TEST_CASE("matmul propagates NaN through zero entries") {
  const Tensor a = Tensor::from_rows({{0.0, 1.0}});
  const Tensor b = Tensor::from_rows({{NAN}, {1.0}});
  CHECK(std::isnan(matmul_raw(a, b)[0]));
}

TEST_CASE("gradient of sum(A x B) w.r.t. A is B^T broadcast") {
  std::mt19937_64 rng(1);
  const Tensor a = random_tensor(3, 4, rng), b = random_tensor(4, 2, rng);
  Tape tape;
  Var va = tape.variable(a), vb = tape.variable(b);
  tape.backward(ad::sum(ad::matmul(va, vb)));
  const Tensor ga = tape.grad(va);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k) CHECK(ga(i, k) == doctest::Approx(b(k, 0) + b(k, 1)).epsilon(1e-14));
  CHECK(fd_error({a, b}, [](Tape&, std::vector<Var>& v) { return ad::sum(ad::matmul(v[0], v[1])); }) < 1e-6);
}

TEST_CASE("elementwise activations") {
  Tape tape;
  const Var x = tape.constant(Tensor::from_rows({{-1.0, 2.0, 0.0}}));
  const Tensor r = ad::relu(x).value();
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
  CHECK(ad::sigmoid(x).value()[2] == 0.5);
  CHECK(ad::tanh(x).value()[2] == 0.0);
  CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("sigmoid derivative at 0.3 matches finite difference") {
  Tape tape;
  const Var x = tape.variable(Tensor::scalar(0.3));
  tape.backward(ad::sigmoid(x));
  const double h = 1e-5;
  const double numeric = (sigmoid(0.3 + h) - sigmoid(0.3 - h)) / (2 * h);
  CHECK(std::abs(tape.grad(x).item() - numeric) < 1e-8);
}

TEST_CASE("bce reference values") {
  CHECK(bce(0.5, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce(1.0, 1.0 - kProbabilityEps) < 1e-6);
  CHECK(bce(0.8, 0.6) == doctest::Approx(0.59192).epsilon(1e-5));
  CHECK(std::isfinite(bce(1.0, 0.0)));
  CHECK(std::isfinite(bce(0.0, 1.0)));
}

TEST_CASE("backward trivial cases") {
  Tape tape;
  const Var theta = tape.variable(Tensor::from_rows({{1, 2}, {3, 4}}));
  const Var c = tape.constant(Tensor::scalar(7.0));
  SUBCASE("constant loss gives zero gradients") {
    tape.backward(c);
    CHECK(tape.grad(theta) == Tensor(2, 2, 0.0));
  }
  SUBCASE("sum gives ones") {
    tape.backward(ad::sum(theta));
    CHECK(tape.grad(theta) == Tensor(2, 2, 1.0));
  }
}

TEST_CASE("backward contract") {
  Tape tape;
  const Var x = tape.variable(Tensor(2, 2, 1.0));
  CHECK_THROWS_AS(tape.backward(x), ContractError);
  const Var s = ad::sum(x);
  tape.backward(s);
  CHECK_THROWS_AS(tape.backward(s), ContractError);
}

TEST_CASE("every op agrees with finite differences") {
  std::mt19937_64 rng(42);
  const Tensor x = random_tensor(3, 4, rng), y = random_tensor(3, 4, rng);
  const Tensor w = random_tensor(4, 5, rng), b = random_tensor(1, 5, rng);
  const double tol = 1e-7;

  CHECK(fd_error({x, w, b}, [](Tape&, std::vector<Var>& v) {
          return ad::sum(ad::tanh(ad::affine(v[0], v[1], v[2])));
        }) < tol);
  CHECK(fd_error({x, y}, [](Tape&, std::vector<Var>& v) { return ad::sum(ad::mul(v[0], ad::sub(v[1], v[0]))); }) <
        tol);
  CHECK(fd_error({x}, [](Tape&, std::vector<Var>& v) { return ad::mean(ad::scale(ad::sigmoid(v[0]), 3.0)); }) < tol);
  CHECK(fd_error({x, y}, [](Tape&, std::vector<Var>& v) {
          return ad::sum(ad::mul(ad::relu(v[0]), ad::add(v[0], v[1])));
        }) < tol);

  const std::vector<double> row_scale = {0.5, -1.0, 2.0};
  CHECK(fd_error({x, y}, [&](Tape&, std::vector<Var>& v) {
          return ad::sum(ad::tanh(ad::add_scaled_rows(v[0], v[1], row_scale)));
        }) < tol);

  const Tensor z = random_tensor(3, 4, rng);
  CHECK(fd_error({x, y, z}, [](Tape&, std::vector<Var>& v) {
          const Var terms[] = {v[0], v[1], v[2]};
          const double coeffs[] = {1.0, 2.0, -0.5};
          return ad::sum(ad::tanh(ad::combine(terms, coeffs)));
        }) < tol);

  // Batch 3, field 2 x 4 per row contracted with a 4-vector per row.
  const Tensor field = random_tensor(3, 8, rng), control = random_tensor(3, 4, rng);
  CHECK(fd_error({field, control}, [](Tape&, std::vector<Var>& v) {
          return ad::sum(ad::tanh(ad::contract_rows(v[0], v[1])));
        }) < tol);

  const Tensor logits = random_tensor(3, 1, rng);
  const Tensor targets = Tensor::from_rows({{1.0}, {0.0}, {0.3}});
  CHECK(fd_error({logits}, [&](Tape&, std::vector<Var>& v) {
          return ad::bce_mean(ad::sigmoid(v[0]), targets);
        }) < tol);
}

TEST_CASE("contract_rows matches hand evaluation") {
  Tape tape;
  // One row; field [[1,2],[3,4]] flattened, control [1, -1].
  const Var f = tape.constant(Tensor::from_rows({{1, 2, 3, 4}}));
  const Var c = tape.constant(Tensor::from_rows({{1, -1}}));
  CHECK(ad::contract_rows(f, c).value() == Tensor::from_rows({{-1, -1}}));
}

TEST_CASE("bce_mean averages the per-row cross-entropy") {
  Tape tape;
  const Var p = tape.constant(Tensor::from_rows({{0.6}, {0.25}}));
  const Tensor t = Tensor::from_rows({{0.8}, {1.0}});
  const double expected = (bce(0.8, 0.6) + bce(1.0, 0.25)) / 2.0;
  CHECK(ad::bce_mean(p, t).value().item() == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("constants receive no gradient and are not reached") {
  Tape tape;
  const Var x = tape.variable(Tensor(1, 2, 1.0));
  const Var k = tape.constant(Tensor(1, 2, 3.0));
  tape.backward(ad::sum(ad::mul(x, k)));
  CHECK_FALSE(tape.requires_grad(k));
  CHECK(tape.grad(x) == Tensor(1, 2, 3.0));
  CHECK(tape.grad(k) == Tensor(1, 2, 0.0));
}
