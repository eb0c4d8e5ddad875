#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "cvnet/complex_matrix.hpp"
#include "cvnet/rng.hpp"
#include "test_util.hpp"

using cvnet::Complex;
using cvnet::ComplexMatrix;
using cvnet::Rng;
using testutil::close;
using testutil::close_mat;
using testutil::random_matrix;

// No-flip sliding dot product, defined locally so the identity
// conv_valid(A, K) == correlate(A, rot180(K)) is checked against an
// independent transcription.
static ComplexMatrix correlate(const ComplexMatrix& a, const ComplexMatrix& k) {
  ComplexMatrix out(a.rows() - k.rows() + 1, a.cols() - k.cols() + 1);
  for (std::size_t i = 1; i <= out.rows(); ++i)
    for (std::size_t j = 1; j <= out.cols(); ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t u = 1; u <= k.rows(); ++u)
        for (std::size_t v = 1; v <= k.cols(); ++v)
          acc += a(i + u - 1, j + v - 1) * k(u, v);
      out(i, j) = acc;
    }
  return out;
}

TEST_CASE("accessors are 1-based and row-major") {
  ComplexMatrix m(2, 3);
  m(1, 1) = Complex(1.0, 0.0);
  m(2, 3) = Complex(0.0, 5.0);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.data()[0] == Complex(1.0, 0.0));
  CHECK(m.data()[5] == Complex(0.0, 5.0));
}

TEST_CASE("rot180 on a 1x1 matrix is the identity") {
  const ComplexMatrix m{{Complex(5.0, 0.0)}};
  CHECK(cvnet::rot180(m) == m);
}

TEST_CASE("rot180 reverses both indices") {
  const ComplexMatrix m{{Complex(1.0, 0.0), Complex(2.0, 0.0)},
                        {Complex(3.0, 0.0), Complex(4.0, 0.0)}};
  const ComplexMatrix expect{{Complex(4.0, 0.0), Complex(3.0, 0.0)},
                             {Complex(2.0, 0.0), Complex(1.0, 0.0)}};
  CHECK(cvnet::rot180(m) == expect);
}

TEST_CASE("rot180 is an involution on a random 7x5 matrix") {
  Rng rng(11);
  const ComplexMatrix m = random_matrix(rng, 7, 5);
  CHECK(cvnet::rot180(cvnet::rot180(m)) == m);
}

TEST_CASE("conv_valid worked 2x2 example") {
  const ComplexMatrix a{{Complex(1.0, 1.0), Complex(2.0, 0.0)},
                        {Complex(0.0, 0.0), Complex(1.0, -1.0)}};
  const ComplexMatrix k{{Complex(1.0, 0.0), Complex(0.0, 0.0)},
                        {Complex(0.0, 0.0), Complex(0.0, -1.0)}};
  const ComplexMatrix out = cvnet::conv_valid(a, k);
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 1);
  CHECK(close(out(1, 1), Complex(2.0, -2.0)));
}

TEST_CASE("conv_valid with a 1x1 kernel scales the input") {
  Rng rng(2);
  const ComplexMatrix a = random_matrix(rng, 4, 6);
  const Complex w(0.5, -1.5);
  const ComplexMatrix k{{w}};
  const ComplexMatrix out = cvnet::conv_valid(a, k);
  REQUIRE(out.same_dims(a));
  for (std::size_t i = 1; i <= a.rows(); ++i)
    for (std::size_t j = 1; j <= a.cols(); ++j)
      CHECK(close(out(i, j), w * a(i, j)));
}

TEST_CASE("conv_valid with a zero kernel gives zeros") {
  Rng rng(3);
  const ComplexMatrix a = random_matrix(rng, 5, 5);
  const ComplexMatrix k(3, 3);
  const ComplexMatrix out = cvnet::conv_valid(a, k);
  for (const Complex& z : out) CHECK(z == Complex(0.0, 0.0));
}

TEST_CASE("conv_valid output dimension law") {
  Rng rng(4);
  for (std::size_t ar = 1; ar <= 6; ++ar)
    for (std::size_t dr = 1; dr <= ar; ++dr) {
      const ComplexMatrix a = random_matrix(rng, ar, 6);
      const ComplexMatrix k = random_matrix(rng, dr, 3);
      const ComplexMatrix out = cvnet::conv_valid(a, k);
      CHECK(out.rows() == ar - dr + 1);
      CHECK(out.cols() == 6 - 3 + 1);
    }
}

TEST_CASE("conv_valid is bilinear in the input") {
  Rng rng(5);
  const ComplexMatrix x = random_matrix(rng, 6, 6);
  const ComplexMatrix y = random_matrix(rng, 6, 6);
  const ComplexMatrix k = random_matrix(rng, 3, 3);
  const Complex alpha(0.7, -0.3);
  const Complex beta(-1.2, 0.4);
  const ComplexMatrix lhs =
      cvnet::conv_valid(cvnet::axpy(alpha, x, cvnet::axpy(beta, y, ComplexMatrix(6, 6))), k);
  const ComplexMatrix rhs = cvnet::axpy(
      alpha, cvnet::conv_valid(x, k),
      cvnet::axpy(beta, cvnet::conv_valid(y, k), ComplexMatrix(4, 4)));
  CHECK(close_mat(lhs, rhs, 1e-12));
}

TEST_CASE("conv_valid is bilinear in the kernel") {
  Rng rng(6);
  const ComplexMatrix a = random_matrix(rng, 6, 6);
  const ComplexMatrix k1 = random_matrix(rng, 2, 2);
  const ComplexMatrix k2 = random_matrix(rng, 2, 2);
  const Complex alpha(0.9, 1.1);
  const ComplexMatrix lhs =
      cvnet::conv_valid(a, cvnet::axpy(alpha, k1, k2));
  const ComplexMatrix rhs =
      cvnet::axpy(alpha, cvnet::conv_valid(a, k1), cvnet::conv_valid(a, k2));
  CHECK(close_mat(lhs, rhs, 1e-12));
}

TEST_CASE("conv_valid equals correlate with the rotated kernel") {
  Rng rng(7);
  const ComplexMatrix a = random_matrix(rng, 8, 7);
  const ComplexMatrix k = random_matrix(rng, 3, 2);
  CHECK(close_mat(cvnet::conv_valid(a, k), correlate(a, cvnet::rot180(k)), 1e-12));
}

TEST_CASE("conv_valid supports rectangular kernels") {
  Rng rng(8);
  const ComplexMatrix a = random_matrix(rng, 5, 9);
  const ComplexMatrix k = random_matrix(rng, 2, 4);
  const ComplexMatrix out = cvnet::conv_valid(a, k);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 6);
}

TEST_CASE("conv_valid rejects oversized kernels and empty operands") {
  Rng rng(9);
  const ComplexMatrix a = random_matrix(rng, 3, 3);
  const ComplexMatrix big = random_matrix(rng, 4, 2);
  CHECK_THROWS_AS(cvnet::conv_valid(a, big), std::invalid_argument);
  CHECK_THROWS_AS(cvnet::conv_valid(ComplexMatrix(), a), std::invalid_argument);
  CHECK_THROWS_AS(cvnet::conv_valid(a, ComplexMatrix()), std::invalid_argument);
}

TEST_CASE("hadamard identity and j*j") {
  Rng rng(10);
  const ComplexMatrix a = random_matrix(rng, 3, 3);
  ComplexMatrix ones(3, 3);
  for (Complex& z : ones) z = Complex(1.0, 0.0);
  CHECK(cvnet::hadamard(a, ones) == a);

  const ComplexMatrix jj{{Complex(0.0, 1.0)}};
  const ComplexMatrix prod = cvnet::hadamard(jj, jj);
  CHECK(close(prod(1, 1), Complex(-1.0, 0.0)));
}

TEST_CASE("hadamard matches the scalar loop on a random pair") {
  Rng rng(12);
  const ComplexMatrix a = random_matrix(rng, 3, 3);
  const ComplexMatrix b = random_matrix(rng, 3, 3);
  const ComplexMatrix out = cvnet::hadamard(a, b);
  for (std::size_t i = 1; i <= 3; ++i)
    for (std::size_t j = 1; j <= 3; ++j)
      CHECK(close(out(i, j), a(i, j) * b(i, j)));
}

TEST_CASE("hadamard rejects dimension mismatches") {
  CHECK_THROWS_AS(cvnet::hadamard(ComplexMatrix(2, 2), ComplexMatrix(2, 3)),
                  std::invalid_argument);
}

TEST_CASE("axpy degenerate cases") {
  Rng rng(13);
  const ComplexMatrix x = random_matrix(rng, 4, 4);
  const ComplexMatrix y = random_matrix(rng, 4, 4);
  CHECK(cvnet::axpy(Complex(0.0, 0.0), x, y) == y);
  CHECK(cvnet::axpy(Complex(1.0, 0.0), x, ComplexMatrix(4, 4)) == x);
}

TEST_CASE("conj_matrix flips imaginary signs") {
  const ComplexMatrix m{{Complex(1.0, 2.0), Complex(-3.0, -4.0)}};
  const ComplexMatrix c = cvnet::conj_matrix(m);
  CHECK(c(1, 1) == Complex(1.0, -2.0));
  CHECK(c(1, 2) == Complex(-3.0, 4.0));
}

TEST_CASE("zeropad places the original block and zeros elsewhere") {
  const ComplexMatrix m{{Complex(1.0, 1.0)}};
  const ComplexMatrix p = cvnet::zeropad(m, 1, 2, 3, 0);
  CHECK(p.rows() == 4);
  CHECK(p.cols() == 4);
  CHECK(p(2, 4) == Complex(1.0, 1.0));
  std::size_t nonzero = 0;
  for (const Complex& z : p)
    if (z != Complex(0.0, 0.0)) ++nonzero;
  CHECK(nonzero == 1);
}

TEST_CASE("matrix_sum adds every entry") {
  const ComplexMatrix m{{Complex(1.0, 1.0), Complex(2.0, -1.0)},
                        {Complex(-0.5, 0.0), Complex(0.0, 3.0)}};
  CHECK(close(cvnet::matrix_sum(m), Complex(2.5, 3.0)));
}

TEST_CASE("max_abs_diff reports the worst component difference") {
  const ComplexMatrix a{{Complex(1.0, 1.0), Complex(0.0, 0.0)}};
  const ComplexMatrix b{{Complex(1.0, 1.5), Complex(0.25, 0.0)}};
  CHECK(cvnet::max_abs_diff(a, b) == doctest::Approx(0.5));
}

TEST_CASE("operations are deterministic") {
  Rng rng_a(42);
  Rng rng_b(42);
  const ComplexMatrix a1 = random_matrix(rng_a, 6, 6);
  const ComplexMatrix a2 = random_matrix(rng_b, 6, 6);
  const ComplexMatrix k1 = random_matrix(rng_a, 3, 3);
  const ComplexMatrix k2 = random_matrix(rng_b, 3, 3);
  CHECK(a1 == a2);
  CHECK(cvnet::conv_valid(a1, k1) == cvnet::conv_valid(a2, k2));
}
