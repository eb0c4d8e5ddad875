#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cvnet/backprop.hpp"
#include "cvnet/complex_matrix.hpp"
#include "cvnet/layers.hpp"

namespace cvnet {

// Reference convolution transcribed directly from the definition with
// explicit real/imaginary component products. Deliberately shares no
// arithmetic helpers with conv_valid so the two routes stay independent.
ComplexMatrix conv_oracle(const ComplexMatrix& a, const ComplexMatrix& k);

struct GradCheckRow {
  std::string tensor;
  std::size_t plane = 0, i = 0, j = 0;
  char part = 'r';  // 'r' real component, 'i' imaginary component
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double max_rel_err = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;

  static std::string csv_header();
  std::string to_csv() const;
};

// Analytic backward pass under test; defaults to backward_sample.
using BackwardFn =
    std::function<GradientSet(const NetworkParams&, const ForwardCache&,
                              Complex, LossGradMode, CReluDeriv)>;

// Central-difference check of dL/dRe(p) and dL/dIm(p) for every parameter
// component of a freshly seeded network against the analytic backward pass.
// The probe input has i.i.d. uniform [0, 1] components and the target is
// 1 + 0j; the loss seed is always Signed (the only differentiable mode) and
// the dense head uses split sigmoid. rel_err compares against the larger
// magnitude, falling back to the absolute difference below 1e-8. The note
// records pre-activation components within 1e-3 of a gate boundary for the
// gated activation kinds.
GradCheckReport fd_gradcheck(const LayerShapes& shapes, Variant variant,
                             const ActivationKind& conv_kind,
                             CReluDeriv crelu_mode, std::uint64_t seed,
                             double h, double threshold,
                             const BackwardFn& backward = {});

struct SimEquivReport {
  std::size_t trials = 0;
  double max_diff = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Random-instance equivalence of the split-simulated convolution against the
// direct complex convolution: inputs up to 10 x 10, kernels up to 4 x 4,
// one or two planes on each side.
SimEquivReport sim_equiv_check(std::size_t trials, std::uint64_t seed,
                               double tol);

struct CRReport {
  std::string name;
  std::size_t points = 0;
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = false;  // true when both CR equations hold at every point
};

// Checks du/dx = dv/dy and du/dy = -dv/dx at each point with central
// differences of step h; residuals are scaled by max(1, |partials|).
CRReport cauchy_riemann_check(const std::function<Complex(Complex)>& fn,
                              const std::string& name,
                              const std::vector<Complex>& points, double h,
                              double tol);

// Seeded points drawn from the annulus 0.5 <= |z| <= 2 so probe locations
// stay away from the origin and from overflow.
std::vector<Complex> cr_random_points(std::size_t n, std::uint64_t seed);

}  // namespace cvnet
