#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvnet/backprop.hpp"
#include "cvnet/layers.hpp"
#include "cvnet/optim.hpp"
#include "cvnet/rng.hpp"

using cvnet::Complex;
using cvnet::GradientSet;
using cvnet::LayerShapes;
using cvnet::NetworkParams;
using cvnet::Optimizer;
using cvnet::ParamCoord;
using cvnet::Reg;

static NetworkParams make_params(std::uint64_t seed = 91) {
  return cvnet::init_params(LayerShapes::derive(8, 8, 2, 2, 2, 2, 2), seed);
}

static GradientSet grads_copying_params(const NetworkParams& p) {
  GradientSet g = cvnet::zero_gradients(p);
  cvnet::for_each_param_pair(p, g,
                             [](const ParamCoord&, const Complex& pz, Complex& gz) {
                               gz = pz;
                             });
  return g;
}

static GradientSet constant_grads(const NetworkParams& p, Complex c) {
  GradientSet g = cvnet::zero_gradients(p);
  cvnet::for_each_param_pair(p, g,
                             [&](const ParamCoord&, const Complex&, Complex& gz) {
                               gz = c;
                             });
  return g;
}

static double max_param_abs(const NetworkParams& p) {
  double m = 0.0;
  cvnet::for_each_param(p, [&](const ParamCoord&, const Complex& z) {
    m = std::max({m, std::abs(z.real()), std::abs(z.imag())});
  });
  return m;
}

TEST_CASE("sgd_step with zero gradients leaves parameters unchanged") {
  NetworkParams p = make_params();
  const NetworkParams before = p;
  cvnet::sgd_step(p, cvnet::zero_gradients(p), 0.5);
  CHECK(p.w1 == before.w1);
  CHECK(p.w2 == before.w2);
  CHECK(p.w3 == before.w3);
  CHECK(p.b3 == before.b3);
}

TEST_CASE("sgd_step applies p - lr * g componentwise") {
  NetworkParams p = make_params();
  cvnet::for_each_param(p, [](const ParamCoord&, Complex& z) { z = Complex(0.0, 0.0); });
  const Complex c(0.25, -0.5);
  cvnet::sgd_step(p, constant_grads(p, c), 1.0);
  cvnet::for_each_param(p, [&](const ParamCoord&, const Complex& z) {
    CHECK(z == -c);
  });
}

TEST_CASE("two half-rate steps equal one full step with a fixed gradient") {
  NetworkParams a = make_params(92);
  NetworkParams b = a;
  const GradientSet g = constant_grads(a, Complex(0.3, 0.7));
  cvnet::sgd_step(a, g, 0.1);
  cvnet::sgd_step(a, g, 0.1);
  cvnet::sgd_step(b, g, 0.2);
  cvnet::for_each_param_pair(a, grads_copying_params(b),
                             [](const ParamCoord&, const Complex& za, const Complex& zb) {
                               CHECK(std::abs(za - zb) <= 1e-15);
                             });
}

TEST_CASE("momentum with mu = 0 is bitwise identical to sgd") {
  NetworkParams a = make_params(93);
  NetworkParams b = a;
  Optimizer opt(a, 0.05, 0.0);
  const GradientSet g = grads_copying_params(a);
  cvnet::momentum_step(a, opt, g);
  cvnet::sgd_step(b, g, 0.05);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);
  CHECK(a.w3 == b.w3);
  CHECK(a.b3 == b.b3);
}

TEST_CASE("momentum velocity follows the geometric series under a constant gradient") {
  NetworkParams p = make_params(94);
  const double lr = 0.1, mu = 0.9;
  Optimizer opt(p, lr, mu);
  const Complex c(1.0, -2.0);
  const GradientSet g = constant_grads(p, c);
  const int k = 7;
  for (int i = 0; i < k; ++i) cvnet::momentum_step(p, opt, g);
  const Complex expect =
      -lr * c * (1.0 - std::pow(mu, k)) / (1.0 - mu);
  cvnet::for_each_param_pair(
      p, opt.velocity, [&](const ParamCoord&, const Complex&, const Complex& v) {
        CHECK(std::abs(v - expect) <= 1e-12);
      });
}

TEST_CASE("momentum keeps moving on zero gradients") {
  NetworkParams p = make_params(95);
  const NetworkParams start = p;
  Optimizer opt(p, 0.1, 0.5);
  cvnet::momentum_step(p, opt, constant_grads(p, Complex(1.0, 0.0)));
  const NetworkParams after_one = p;
  cvnet::momentum_step(p, opt, cvnet::zero_gradients(p));
  // velocity was -0.1 per real component; the second step adds mu * velocity
  cvnet::for_each_param_pair(
      p, grads_copying_params(after_one),
      [&](const ParamCoord&, const Complex& now, const Complex& prev) {
        CHECK(std::abs((now - prev) - Complex(-0.05, 0.0)) <= 1e-15);
      });
  (void)start;
}

TEST_CASE("non-finite gradients abort the step before touching parameters") {
  NetworkParams p = make_params(96);
  const NetworkParams before = p;
  GradientSet g = cvnet::zero_gradients(p);
  g.gb3 = Complex(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS(cvnet::sgd_step(p, g, 0.1), std::runtime_error);
  CHECK(p.w1 == before.w1);
  CHECK(p.b3 == before.b3);
  Optimizer opt(p, 0.1, 0.9);
  CHECK_THROWS_AS(cvnet::momentum_step(p, opt, g), std::runtime_error);
  CHECK(p.w1 == before.w1);
}

TEST_CASE("L2 decay with zero gradients scales weights by exactly 1 - lr*lambda/M") {
  NetworkParams p = make_params(97);
  const NetworkParams before = p;
  GradientSet g = cvnet::zero_gradients(p);
  const double lr = 0.1, lambda = 2.0;
  const std::size_t m = 5;
  cvnet::apply_weight_decay(p, g, lr, lambda, m, Reg::L2);
  const double keep = 1.0 - lr * lambda / double(m);
  for (std::size_t pl = 0; pl < p.w1.size(); ++pl)
    for (std::size_t i = 1; i <= p.w1[pl].rows(); ++i)
      for (std::size_t j = 1; j <= p.w1[pl].cols(); ++j) {
        const Complex expect(before.w1[pl](i, j).real() * keep,
                             before.w1[pl](i, j).imag() * keep);
        CHECK(p.w1[pl](i, j) == expect);
      }
  for (std::size_t k = 0; k < p.w3.size(); ++k) {
    const Complex expect(before.w3[k].real() * keep, before.w3[k].imag() * keep);
    CHECK(p.w3[k] == expect);
  }
  CHECK(p.b1 == before.b1);
  CHECK(p.b2 == before.b2);
  CHECK(p.b3 == before.b3);
  CHECK(cvnet::max_abs(g) == 0.0);
}

TEST_CASE("weight decay rejects a decay factor at or beyond 1") {
  NetworkParams p = make_params(98);
  GradientSet g = cvnet::zero_gradients(p);
  CHECK_THROWS_AS(cvnet::apply_weight_decay(p, g, 1.0, 5.0, 5, Reg::L2),
                  std::invalid_argument);
  CHECK_THROWS_AS(cvnet::apply_weight_decay(p, g, 1.0, 6.0, 5, Reg::L2),
                  std::invalid_argument);
}

TEST_CASE("L1 augments weight gradients by the componentwise sign") {
  NetworkParams p = make_params(99);
  cvnet::for_each_param(p, [](const ParamCoord& c, Complex& z) {
    if (c.tensor[0] == 'b') return;
    z = Complex(2.0, -3.0);
  });
  p.w1[0](1, 1) = Complex(0.0, -1.0);
  GradientSet g = cvnet::zero_gradients(p);
  const double lambda = 4.0;
  const std::size_t m = 8;
  cvnet::apply_weight_decay(p, g, 0.1, lambda, m, Reg::L1);
  const double c = lambda / double(m);
  CHECK(g.gw1[0](1, 1) == Complex(0.0, -c));  // sign(0) = 0 on the real part
  CHECK(g.gw1[0](1, 2) == Complex(c, -c));
  CHECK(g.gw2[0](1, 1) == Complex(c, -c));
  CHECK(g.gw3[0] == Complex(c, -c));
  for (const Complex& z : g.gb1) CHECK(z == Complex(0.0, 0.0));
  CHECK(g.gb3 == Complex(0.0, 0.0));
}

TEST_CASE("L1 leaves parameters untouched and lambda 0 is a no-op") {
  NetworkParams p = make_params(100);
  const NetworkParams before = p;
  GradientSet g = cvnet::zero_gradients(p);
  cvnet::apply_weight_decay(p, g, 0.1, 4.0, 8, Reg::L1);
  CHECK(p.w1 == before.w1);
  CHECK(p.w3 == before.w3);

  GradientSet g2 = cvnet::zero_gradients(p);
  cvnet::apply_weight_decay(p, g2, 0.1, 0.0, 8, Reg::L2);
  CHECK(p.w1 == before.w1);
  CHECK(cvnet::max_abs(g2) == 0.0);
}

TEST_CASE("gradient descent on the quadratic loss reaches zero at lr 1") {
  // L(w) = 0.5|w|^2 has gradient w per real component
  NetworkParams p = make_params(101);
  cvnet::sgd_step(p, grads_copying_params(p), 1.0);
  CHECK(max_param_abs(p) == 0.0);

  NetworkParams q = make_params(102);
  double prev = max_param_abs(q);
  for (int i = 0; i < 5; ++i) {
    cvnet::sgd_step(q, grads_copying_params(q), 0.5);
    const double now = max_param_abs(q);
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("updates preserve every parameter shape") {
  NetworkParams p = make_params(103);
  const NetworkParams before = p;
  Optimizer opt(p, 0.1, 0.9, 1.0, Reg::L2);
  GradientSet g = grads_copying_params(p);
  cvnet::apply_weight_decay(p, g, opt.lr, opt.lambda, 10, opt.reg);
  cvnet::momentum_step(p, opt, g);
  REQUIRE(p.w1.size() == before.w1.size());
  for (std::size_t pl = 0; pl < p.w1.size(); ++pl)
    CHECK(p.w1[pl].same_dims(before.w1[pl]));
  CHECK(p.w3.size() == before.w3.size());
}
