#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "cvnet/rng.hpp"
#include "cvnet/train.hpp"
#include "cvnet/verify.hpp"
#include "test_util.hpp"

using cvnet::ActivationKind;
using cvnet::Activation;
using cvnet::Complex;
using cvnet::ComplexMatrix;
using cvnet::CReluDeriv;
using cvnet::LayerShapes;
using cvnet::Variant;

namespace {

const ActivationKind kSigmoid{Activation::SplitSigmoid, 0.01};
const LayerShapes kToy = LayerShapes::derive(8, 8, 2, 2, 2, 2, 2);

}  // namespace

TEST_CASE("conv_oracle agrees with conv_valid on random instances") {
  cvnet::Rng rng(301);
  for (int t = 0; t < 200; ++t) {
    const std::size_t ar = 1 + rng.below(10), ac = 1 + rng.below(10);
    const std::size_t kr = 1 + rng.below(ar > 4 ? 4 : ar);
    const std::size_t kc = 1 + rng.below(ac > 4 ? 4 : ac);
    const ComplexMatrix a = testutil::random_matrix(rng, ar, ac);
    const ComplexMatrix k = testutil::random_matrix(rng, kr, kc);
    CHECK(testutil::close_mat(cvnet::conv_oracle(a, k), cvnet::conv_valid(a, k),
                              1e-12));
  }
}

TEST_CASE("conv_oracle reproduces the worked example") {
  const ComplexMatrix a{{Complex(1, 1), Complex(2, 0)},
                        {Complex(0, 0), Complex(1, -1)}};
  const ComplexMatrix k{{Complex(1, 0), Complex(0, 0)},
                        {Complex(0, 0), Complex(0, -1)}};
  const ComplexMatrix out = cvnet::conv_oracle(a, k);
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 1);
  CHECK(out(1, 1) == Complex(2, -2));
}

TEST_CASE("gradcheck passes on the toy network for every variant") {
  for (Variant v : {Variant::FullCV, Variant::CVForwardCNN, Variant::RVSplit}) {
    const auto rep =
        cvnet::fd_gradcheck(kToy, v, kSigmoid, CReluDeriv::Split, 5, 1e-5, 1e-4);
    INFO("variant ", cvnet::variant_name(v), " max_rel_err ", rep.max_rel_err);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < 1e-4);
    CHECK(rep.threshold == 1e-4);
    CHECK_FALSE(rep.rows.empty());
  }
}

TEST_CASE("gradcheck covers both components of every parameter") {
  const auto rep = cvnet::fd_gradcheck(kToy, Variant::FullCV, kSigmoid,
                                       CReluDeriv::Split, 6, 1e-5, 1e-4);
  const auto n = cvnet::count_params(
      cvnet::init_params(kToy, 6, Variant::FullCV));
  CHECK(rep.rows.size() == 2 * n.complex_entries);
  bool has_re = false, has_im = false, has_w1 = false, has_b3 = false;
  for (const auto& r : rep.rows) {
    if (r.part == 'r') has_re = true;
    if (r.part == 'i') has_im = true;
    if (r.tensor == "W1") has_w1 = true;
    if (r.tensor == "b3") has_b3 = true;
  }
  CHECK(has_re);
  CHECK(has_im);
  CHECK(has_w1);
  CHECK(has_b3);
}

TEST_CASE("gradcheck csv lists one row per component") {
  const auto rep = cvnet::fd_gradcheck(kToy, Variant::FullCV, kSigmoid,
                                       CReluDeriv::Split, 7, 1e-5, 1e-4);
  CHECK(cvnet::GradCheckReport::csv_header() ==
        "tensor,plane,i,j,part,analytic,numeric,rel_err");
  const std::string csv = rep.to_csv();
  CHECK(csv.find("tensor,plane,i,j,part") == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == rep.rows.size() + 1);
}

TEST_CASE("gradcheck detects a corrupted backward pass") {
  const cvnet::BackwardFn corrupted =
      [](const cvnet::NetworkParams& p, const cvnet::ForwardCache& c, Complex y,
         cvnet::LossGradMode mode, CReluDeriv cm) {
        cvnet::GradientSet g = cvnet::backward_sample(p, c, y, mode, cm);
        g.gw2[0](1, 1) = -g.gw2[0](1, 1);
        return g;
      };
  const auto rep = cvnet::fd_gradcheck(kToy, Variant::FullCV, kSigmoid,
                                       CReluDeriv::Split, 8, 1e-5, 1e-4,
                                       corrupted);
  CHECK_FALSE(rep.pass);
  bool found = false;
  for (const auto& r : rep.rows)
    if (r.tensor == "W2" && r.plane == 1 && r.i == 1 && r.j == 1 &&
        r.rel_err > 1.0)
      found = true;
  CHECK(found);
}

TEST_CASE("sim_equiv_check passes at machine precision") {
  const auto rep = cvnet::sim_equiv_check(1000, 303, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.trials == 1000);
  CHECK(rep.max_diff <= 1e-12);
  CHECK_THROWS_AS(cvnet::sim_equiv_check(0, 1, 1e-12), std::invalid_argument);
}

TEST_CASE("cauchy-riemann residuals separate holomorphic maps from the rest") {
  const auto pts = cvnet::cr_random_points(100, 304);
  REQUIRE(pts.size() == 100);
  for (Complex z : pts) {
    CHECK(std::abs(z) >= 0.5 - 1e-12);
    CHECK(std::abs(z) <= 2.0 + 1e-12);
  }
  const auto again = cvnet::cr_random_points(100, 304);
  CHECK(pts == again);

  const auto square = cvnet::cauchy_riemann_check(
      [](Complex z) { return z * z; }, "z^2", pts, 1e-5, 1e-5);
  CHECK(square.pass);
  const auto expz = cvnet::cauchy_riemann_check(
      [](Complex z) { return std::exp(z); }, "exp", pts, 1e-5, 1e-5);
  CHECK(expz.pass);
  const auto conj = cvnet::cauchy_riemann_check(
      [](Complex z) { return std::conj(z); }, "conj", pts, 1e-5, 1e-5);
  CHECK_FALSE(conj.pass);
  CHECK(conj.max_residual > 1e-5);
  const auto sqmag = cvnet::cauchy_riemann_check(
      [](Complex z) { return Complex(std::norm(z), 0.0); }, "|z|^2", pts, 1e-5,
      1e-5);
  CHECK_FALSE(sqmag.pass);
}

TEST_CASE("crelu is locally holomorphic only where it acts as the identity") {
  const ActivationKind crelu{Activation::CReLU, 0.01};
  const auto fn = [&](Complex z) { return cvnet::activation_scalar(crelu, z); };
  const auto inside = cvnet::cauchy_riemann_check(fn, "crelu", {Complex(1, 2)},
                                                  1e-5, 1e-5);
  CHECK(inside.pass);
  const auto outside = cvnet::cauchy_riemann_check(fn, "crelu",
                                                   {Complex(1, -2)}, 1e-5, 1e-5);
  CHECK_FALSE(outside.pass);
}

TEST_CASE("gradcheck rejects a singular toy geometry") {
  // 8 x 6 with pool 2 collapses the second pooled width to zero
  CHECK_THROWS_AS(LayerShapes::derive(8, 6, 2, 2, 2, 2, 2),
                  std::invalid_argument);
}
