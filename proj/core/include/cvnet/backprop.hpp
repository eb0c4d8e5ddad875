#pragma once

#include <cstddef>
#include <vector>

#include "cvnet/complex_matrix.hpp"
#include "cvnet/layers.hpp"
#include "cvnet/simcv.hpp"

namespace cvnet {

// Gradient pairing convention: a complex gradient entry stores
// dL/dRe(p) + j dL/dIm(p) for the matching parameter entry p. Weight and
// input gradients therefore conjugate the cached data-side factor; on purely
// real data and parameters the conjugate is the identity and the formulas
// reduce to the real-valued network equations.

// Loss gradient seed dL/d(yhat):
//   Signed: (Re yhat - Re y) + j (Im yhat - Im y)
//   Abs:    |Re y - Re yhat| + j |Im y - Im yhat|  (absolute component
//           differences; selectable for training, not valid for FD checks)
enum class LossGradMode { Signed, Abs };

// Per-sample loss 0.5 * |y - yhat|^2.
double loss(Complex y, Complex yhat);
Complex loss_grad(Complex y, Complex yhat, LossGradMode mode);

// Adjoint of avgpool under the real inner product:
//   out(i, j) = gs(ceil(i/g), ceil(j/g)) / g^2 inside the pooled region,
//   exactly 0 in truncated rows/cols. Output dims may exceed g * dims(gs)
//   by at most g - 1 in each direction.
ComplexMatrix upsample(const ComplexMatrix& gs, std::size_t g,
                       std::size_t out_rows, std::size_t out_cols);

// Composes an output gradient with the activation derivative at V.
// Split kinds compose per real component; gated kinds (CReLU Joint, zReLU)
// multiply by their real scalar gate; real-mode kinds drive the real channel
// only (their imaginary output is identically zero).
Complex activation_backward_scalar(const ActivationKind& kind, Complex g_out,
                                   Complex v,
                                   CReluDeriv mode = CReluDeriv::Joint);
ComplexMatrix activation_backward(const ActivationKind& kind,
                                  const ComplexMatrix& g_out,
                                  const ComplexMatrix& v,
                                  CReluDeriv mode = CReluDeriv::Joint);

// Gradients for every trainable tensor; shapes mirror NetworkParams.
struct GradientSet {
  ComplexTensor gw1;
  std::vector<Complex> gb1;
  ComplexTensor gw2;
  std::vector<Complex> gb2;
  std::vector<Complex> gw3;
  Complex gb3{0.0, 0.0};
  ComplexTensor gr1;
  ComplexTensor gr2;
};

GradientSet zero_gradients(const NetworkParams& p);
void accumulate(GradientSet& acc, const GradientSet& g);
void scale(GradientSet& g, double s);
void zero_imag(GradientSet& g);
bool all_finite(const GradientSet& g);
double max_abs(const GradientSet& g);

// Output layer gradients:
//   dV3 = activation_backward(kind, loss_grad, V3)
//   gW3[k] = dV3 * conj(f[k]),  gb3 = dV3,  gf[k] = dV3 * conj(w3[k])
struct OutputLayerGrads {
  std::vector<Complex> gw3;
  Complex gb3{0.0, 0.0};
  std::vector<Complex> gf;
};
OutputLayerGrads grad_output_layer(const std::vector<Complex>& w3,
                                   const std::vector<Complex>& f, Complex v3,
                                   Complex yhat, Complex y, LossGradMode mode,
                                   const ActivationKind& kind,
                                   CReluDeriv crelu_mode = CReluDeriv::Joint);

// Generic convolution layer adjoints; gv holds gradients w.r.t. the layer's
// pre-activation outputs (activation already composed by the caller).
//   weights: gW(ki, ko) = conv_valid(rot180(conj(inputs[ki])), gv[ko])
//   biases:  gb[ko] = sum of gv[ko]
//   input:   gIn[ki] = sum_ko conv_valid(zeropad(gv[ko], d - 1 on all
//            sides), rot180(conj(kernels[ki * kout + ko])))
ComplexTensor conv_layer_grad_weights(const ComplexTensor& inputs,
                                      const ComplexTensor& gv);
std::vector<Complex> conv_layer_grad_biases(const ComplexTensor& gv);
ComplexTensor conv_layer_grad_input(const ComplexTensor& gv,
                                    const ComplexTensor& kernels,
                                    std::size_t in_planes);

// Named layer wrappers over the generic adjoints.
struct ConvLayerGrads {
  ComplexTensor gw;
  std::vector<Complex> gb;
};
ConvLayerGrads grad_conv2(const ComplexTensor& s1, const ComplexTensor& gv2);
ComplexTensor grad_through_conv2(const ComplexTensor& gv2,
                                 const ComplexTensor& w2,
                                 std::size_t in_planes);
ConvLayerGrads grad_conv1(const ComplexTensor& input,
                          const ComplexTensor& gv1);

// Everything backward_sample needs from one forward pass.
struct ForwardCache {
  ComplexTensor input;
  ComplexTensor v1, o1, s1;
  ResidualCache res;  // populated for the residual variant only
  ComplexTensor v2, o2, s2;
  std::vector<Complex> f;
  Complex v3{0.0, 0.0};
  Complex yhat{0.0, 0.0};
  ActivationKind conv_kind;
  ActivationKind dense_kind;

  const ComplexTensor& conv2_input() const {
    return res.out.empty() ? s1 : res.out;
  }
};

// Residual block adjoint; g_out is the gradient w.r.t. the block output.
struct ResidualGrads {
  ComplexTensor gs;  // gradient w.r.t. the block input
  ComplexTensor gr1;
  ComplexTensor gr2;
};
ResidualGrads residual_block_backward(const ComplexTensor& r1,
                                      const ComplexTensor& r2,
                                      const ComplexTensor& s,
                                      const ResidualCache& cache,
                                      const ComplexTensor& g_out,
                                      const ActivationKind& kind,
                                      CReluDeriv crelu_mode);

// Full per-sample gradient for the two-conv-layer network (plus the optional
// residual block). Kinds are taken from the cache; the loss seed from mode.
GradientSet backward_sample(const NetworkParams& params,
                            const ForwardCache& cache, Complex y,
                            LossGradMode mode,
                            CReluDeriv crelu_mode = CReluDeriv::Joint);

// Deterministic walk over every parameter entry, w1 planes first (row-major
// entries), then b1, w2, b2, w3, b3, r1, r2. Coordinates are 1-based; bias
// vectors expose their index as the plane.
struct ParamCoord {
  const char* tensor;
  std::size_t plane, i, j;
};

template <class Params, class F>
void for_each_param(Params&& p, F&& f) {
  auto walk_tensor = [&](const char* name, auto&& t) {
    for (std::size_t pl = 0; pl < t.size(); ++pl)
      for (std::size_t i = 1; i <= t[pl].rows(); ++i)
        for (std::size_t j = 1; j <= t[pl].cols(); ++j)
          f(ParamCoord{name, pl + 1, i, j}, t[pl](i, j));
  };
  auto walk_vector = [&](const char* name, auto&& v, bool as_planes) {
    for (std::size_t k = 0; k < v.size(); ++k)
      f(as_planes ? ParamCoord{name, k + 1, 1, 1}
                  : ParamCoord{name, 1, 1, k + 1},
        v[k]);
  };
  walk_tensor("W1", p.w1);
  walk_vector("b1", p.b1, true);
  walk_tensor("W2", p.w2);
  walk_vector("b2", p.b2, true);
  walk_vector("W3", p.w3, false);
  f(ParamCoord{"b3", 1, 1, 1}, p.b3);
  walk_tensor("R1", p.r1);
  walk_tensor("R2", p.r2);
}

// Lockstep walk over parameters and their gradient slots.
template <class Params, class Grads, class F>
void for_each_param_pair(Params&& p, Grads&& g, F&& f) {
  auto walk_tensor = [&](const char* name, auto&& tp, auto&& tg) {
    for (std::size_t pl = 0; pl < tp.size(); ++pl)
      for (std::size_t i = 1; i <= tp[pl].rows(); ++i)
        for (std::size_t j = 1; j <= tp[pl].cols(); ++j)
          f(ParamCoord{name, pl + 1, i, j}, tp[pl](i, j), tg[pl](i, j));
  };
  auto walk_vector = [&](const char* name, auto&& vp, auto&& vg,
                         bool as_planes) {
    for (std::size_t k = 0; k < vp.size(); ++k)
      f(as_planes ? ParamCoord{name, k + 1, 1, 1}
                  : ParamCoord{name, 1, 1, k + 1},
        vp[k], vg[k]);
  };
  walk_tensor("W1", p.w1, g.gw1);
  walk_vector("b1", p.b1, g.gb1, true);
  walk_tensor("W2", p.w2, g.gw2);
  walk_vector("b2", p.b2, g.gb2, true);
  walk_vector("W3", p.w3, g.gw3, false);
  f(ParamCoord{"b3", 1, 1, 1}, p.b3, g.gb3);
  walk_tensor("R1", p.r1, g.gr1);
  walk_tensor("R2", p.r2, g.gr2);
}

}  // namespace cvnet
