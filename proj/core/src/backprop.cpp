#include "cvnet/backprop.hpp"

#include <cmath>
#include <stdexcept>

namespace cvnet {

double loss(Complex y, Complex yhat) { return 0.5 * std::norm(y - yhat); }

Complex loss_grad(Complex y, Complex yhat, LossGradMode mode) {
  if (mode == LossGradMode::Signed)
    return {yhat.real() - y.real(), yhat.imag() - y.imag()};
  return {std::abs(y.real() - yhat.real()), std::abs(y.imag() - yhat.imag())};
}

ComplexMatrix upsample(const ComplexMatrix& gs, std::size_t g,
                       std::size_t out_rows, std::size_t out_cols) {
  if (g == 0) throw std::invalid_argument("upsample: g must be >= 1");
  if (gs.empty()) throw std::invalid_argument("upsample: empty input");
  if (out_rows < g * gs.rows() || out_rows > g * gs.rows() + g - 1 ||
      out_cols < g * gs.cols() || out_cols > g * gs.cols() + g - 1)
    throw std::invalid_argument("upsample: output dims incompatible with g");
  const double inv = 1.0 / static_cast<double>(g * g);
  ComplexMatrix out(out_rows, out_cols);
  for (std::size_t i = 1; i <= g * gs.rows(); ++i)
    for (std::size_t j = 1; j <= g * gs.cols(); ++j)
      out(i, j) = gs((i - 1) / g + 1, (j - 1) / g + 1) * inv;
  return out;
}

Complex activation_backward_scalar(const ActivationKind& kind, Complex g_out,
                                   Complex v, CReluDeriv mode) {
  switch (kind.fn) {
    case Activation::CReLU:
      if (mode == CReluDeriv::Joint) {
        bool on = (v.real() > 0.0 && v.imag() > 0.0) ||
                  (v.real() < 0.0 && v.imag() < 0.0);
        return on ? g_out : Complex{0.0, 0.0};
      }
      return {v.real() > 0.0 ? g_out.real() : 0.0,
              v.imag() > 0.0 ? g_out.imag() : 0.0};
    case Activation::ZReLU: {
      bool on = v.real() >= 0.0 && v.imag() >= 0.0;
      return on ? g_out : Complex{0.0, 0.0};
    }
    case Activation::SplitSigmoid:
    case Activation::SplitTanh: {
      Complex d = activation_deriv_scalar(kind, v, mode);
      return {g_out.real() * d.real(), g_out.imag() * d.imag()};
    }
    default: {
      // Real-mode kinds clamp the imaginary channel to zero, so nothing
      // flows back through it.
      Complex d = activation_deriv_scalar(kind, v, mode);
      return {g_out.real() * d.real(), 0.0};
    }
  }
}

ComplexMatrix activation_backward(const ActivationKind& kind,
                                  const ComplexMatrix& g_out,
                                  const ComplexMatrix& v, CReluDeriv mode) {
  if (!g_out.same_dims(v))
    throw std::invalid_argument("activation_backward: dimension mismatch");
  ComplexMatrix out(v.rows(), v.cols());
  for (std::size_t n = 0; n < v.size(); ++n)
    out.data()[n] =
        activation_backward_scalar(kind, g_out.data()[n], v.data()[n], mode);
  return out;
}

GradientSet zero_gradients(const NetworkParams& p) {
  GradientSet g;
  auto zeros_like = [](const ComplexTensor& t) {
    ComplexTensor z;
    z.reserve(t.size());
    for (const auto& m : t) z.emplace_back(m.rows(), m.cols());
    return z;
  };
  g.gw1 = zeros_like(p.w1);
  g.gb1.assign(p.b1.size(), Complex{0.0, 0.0});
  g.gw2 = zeros_like(p.w2);
  g.gb2.assign(p.b2.size(), Complex{0.0, 0.0});
  g.gw3.assign(p.w3.size(), Complex{0.0, 0.0});
  g.gb3 = {0.0, 0.0};
  g.gr1 = zeros_like(p.r1);
  g.gr2 = zeros_like(p.r2);
  return g;
}

namespace {

template <class F>
void for_each_entry(GradientSet& g, F&& f) {
  for (auto& t : g.gw1)
    for (auto& z : t) f(z);
  for (auto& z : g.gb1) f(z);
  for (auto& t : g.gw2)
    for (auto& z : t) f(z);
  for (auto& z : g.gb2) f(z);
  for (auto& z : g.gw3) f(z);
  f(g.gb3);
  for (auto& t : g.gr1)
    for (auto& z : t) f(z);
  for (auto& t : g.gr2)
    for (auto& z : t) f(z);
}

template <class F>
void for_each_entry_const(const GradientSet& g, F&& f) {
  for_each_entry(const_cast<GradientSet&>(g),
                 [&](Complex& z) { f(static_cast<const Complex&>(z)); });
}

}  // namespace

void accumulate(GradientSet& acc, const GradientSet& g) {
  auto add_tensor = [](ComplexTensor& a, const ComplexTensor& b) {
    if (a.size() != b.size())
      throw std::invalid_argument("accumulate: tensor plane mismatch");
    for (std::size_t p = 0; p < a.size(); ++p) {
      if (!a[p].same_dims(b[p]))
        throw std::invalid_argument("accumulate: tensor dim mismatch");
      for (std::size_t n = 0; n < a[p].size(); ++n)
        a[p].data()[n] += b[p].data()[n];
    }
  };
  auto add_vector = [](std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size())
      throw std::invalid_argument("accumulate: vector size mismatch");
    for (std::size_t n = 0; n < a.size(); ++n) a[n] += b[n];
  };
  add_tensor(acc.gw1, g.gw1);
  add_vector(acc.gb1, g.gb1);
  add_tensor(acc.gw2, g.gw2);
  add_vector(acc.gb2, g.gb2);
  add_vector(acc.gw3, g.gw3);
  acc.gb3 += g.gb3;
  add_tensor(acc.gr1, g.gr1);
  add_tensor(acc.gr2, g.gr2);
}

void scale(GradientSet& g, double s) {
  for_each_entry(g, [s](Complex& z) { z *= s; });
}

void zero_imag(GradientSet& g) {
  for_each_entry(g, [](Complex& z) { z = {z.real(), 0.0}; });
}

bool all_finite(const GradientSet& g) {
  bool ok = true;
  for_each_entry_const(g, [&](const Complex& z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) ok = false;
  });
  return ok;
}

double max_abs(const GradientSet& g) {
  double m = 0.0;
  for_each_entry_const(g, [&](const Complex& z) {
    m = std::max(m, std::max(std::abs(z.real()), std::abs(z.imag())));
  });
  return m;
}

OutputLayerGrads grad_output_layer(const std::vector<Complex>& w3,
                                   const std::vector<Complex>& f, Complex v3,
                                   Complex yhat, Complex y, LossGradMode mode,
                                   const ActivationKind& kind,
                                   CReluDeriv crelu_mode) {
  if (w3.size() != f.size())
    throw std::invalid_argument("grad_output_layer: size mismatch");
  Complex dy = loss_grad(y, yhat, mode);
  Complex dv3 = activation_backward_scalar(kind, dy, v3, crelu_mode);
  OutputLayerGrads out;
  out.gw3.resize(w3.size());
  out.gf.resize(w3.size());
  for (std::size_t k = 0; k < w3.size(); ++k) {
    out.gw3[k] = dv3 * std::conj(f[k]);
    out.gf[k] = dv3 * std::conj(w3[k]);
  }
  out.gb3 = dv3;
  return out;
}

ComplexTensor conv_layer_grad_weights(const ComplexTensor& inputs,
                                      const ComplexTensor& gv) {
  ComplexTensor gw;
  gw.reserve(inputs.size() * gv.size());
  for (const auto& in : inputs) {
    ComplexMatrix flipped = rot180(conj_matrix(in));
    for (const auto& g : gv) gw.push_back(conv_valid(flipped, g));
  }
  return gw;
}

std::vector<Complex> conv_layer_grad_biases(const ComplexTensor& gv) {
  std::vector<Complex> gb;
  gb.reserve(gv.size());
  for (const auto& g : gv) gb.push_back(matrix_sum(g));
  return gb;
}

ComplexTensor conv_layer_grad_input(const ComplexTensor& gv,
                                    const ComplexTensor& kernels,
                                    std::size_t in_planes) {
  if (kernels.empty()) throw std::invalid_argument("grad_input: no kernels");
  const std::size_t kout = gv.size();
  if (kernels.size() != in_planes * kout)
    throw std::invalid_argument("grad_input: kernel plane count mismatch");
  const std::size_t d = kernels[0].rows();
  const Complex one{1.0, 0.0};
  ComplexTensor gin;
  gin.reserve(in_planes);
  for (std::size_t ki = 0; ki < in_planes; ++ki) {
    ComplexMatrix acc;
    for (std::size_t ko = 0; ko < kout; ++ko) {
      ComplexMatrix padded = zeropad(gv[ko], d - 1, d - 1, d - 1, d - 1);
      ComplexMatrix flipped = rot180(conj_matrix(kernels[ki * kout + ko]));
      ComplexMatrix term = conv_valid(padded, flipped);
      acc = ko == 0 ? std::move(term) : axpy(one, term, acc);
    }
    gin.push_back(std::move(acc));
  }
  return gin;
}

ConvLayerGrads grad_conv2(const ComplexTensor& s1, const ComplexTensor& gv2) {
  return {conv_layer_grad_weights(s1, gv2), conv_layer_grad_biases(gv2)};
}

ComplexTensor grad_through_conv2(const ComplexTensor& gv2,
                                 const ComplexTensor& w2,
                                 std::size_t in_planes) {
  return conv_layer_grad_input(gv2, w2, in_planes);
}

ConvLayerGrads grad_conv1(const ComplexTensor& input,
                          const ComplexTensor& gv1) {
  return {conv_layer_grad_weights(input, gv1), conv_layer_grad_biases(gv1)};
}

namespace {

ComplexMatrix crop(const ComplexMatrix& m, std::size_t margin) {
  ComplexMatrix out(m.rows() - 2 * margin, m.cols() - 2 * margin);
  for (std::size_t i = 1; i <= out.rows(); ++i)
    for (std::size_t j = 1; j <= out.cols(); ++j)
      out(i, j) = m(i + margin, j + margin);
  return out;
}

ComplexTensor pad_tensor(const ComplexTensor& t, std::size_t m) {
  ComplexTensor out;
  out.reserve(t.size());
  for (const auto& p : t) out.push_back(zeropad(p, m, m, m, m));
  return out;
}

ComplexTensor act_backward_tensor(const ActivationKind& kind,
                                  const ComplexTensor& g,
                                  const ComplexTensor& v, CReluDeriv mode) {
  ComplexTensor out;
  out.reserve(g.size());
  for (std::size_t p = 0; p < g.size(); ++p)
    out.push_back(activation_backward(kind, g[p], v[p], mode));
  return out;
}

}  // namespace

ResidualGrads residual_block_backward(const ComplexTensor& r1,
                                      const ComplexTensor& r2,
                                      const ComplexTensor& s,
                                      const ResidualCache& cache,
                                      const ComplexTensor& g_out,
                                      const ActivationKind& kind,
                                      CReluDeriv crelu_mode) {
  const std::size_t k = s.size();
  const std::size_t d = r1.empty() ? 0 : r1[0].rows();
  if (d == 0 || d % 2 == 0)
    throw std::invalid_argument("residual_block_backward: bad kernel size");
  const std::size_t m = (d - 1) / 2;

  ResidualGrads out;
  // Outer convolution: c2 = SameConv(a2, r2), gc2 = g_out.
  ComplexTensor padded_a2 = pad_tensor(cache.a2, m);
  out.gr2 = conv_layer_grad_weights(padded_a2, g_out);
  ComplexTensor gpad_a2 = conv_layer_grad_input(g_out, r2, k);
  ComplexTensor ga2;
  ga2.reserve(k);
  for (const auto& p : gpad_a2) ga2.push_back(crop(p, m));
  ComplexTensor gc1 = act_backward_tensor(kind, ga2, cache.c1, crelu_mode);

  // Inner convolution: c1 = SameConv(a1, r1).
  ComplexTensor padded_a1 = pad_tensor(cache.a1, m);
  out.gr1 = conv_layer_grad_weights(padded_a1, gc1);
  ComplexTensor gpad_a1 = conv_layer_grad_input(gc1, r1, k);
  ComplexTensor ga1;
  ga1.reserve(k);
  for (const auto& p : gpad_a1) ga1.push_back(crop(p, m));
  ComplexTensor gs_path = act_backward_tensor(kind, ga1, s, crelu_mode);

  // Skip connection adds g_out directly.
  out.gs.reserve(k);
  const Complex one{1.0, 0.0};
  for (std::size_t p = 0; p < k; ++p)
    out.gs.push_back(axpy(one, gs_path[p], g_out[p]));
  return out;
}

GradientSet backward_sample(const NetworkParams& params,
                            const ForwardCache& cache, Complex y,
                            LossGradMode mode, CReluDeriv crelu_mode) {
  const LayerShapes& sh = params.shapes;
  GradientSet g = zero_gradients(params);

  OutputLayerGrads head =
      grad_output_layer(params.w3, cache.f, cache.v3, cache.yhat, y, mode,
                        cache.dense_kind, crelu_mode);
  g.gw3 = std::move(head.gw3);
  g.gb3 = head.gb3;

  ComplexTensor gs2 = unflatten(head.gf, sh.s2_rows, sh.s2_cols, sh.k2);
  ComplexTensor gv2;
  gv2.reserve(sh.k2);
  for (std::size_t p = 0; p < sh.k2; ++p) {
    ComplexMatrix go2 = upsample(gs2[p], sh.g, sh.v2_rows, sh.v2_cols);
    gv2.push_back(
        activation_backward(cache.conv_kind, go2, cache.v2[p], crelu_mode));
  }

  ConvLayerGrads conv2 = grad_conv2(cache.conv2_input(), gv2);
  g.gw2 = std::move(conv2.gw);
  g.gb2 = std::move(conv2.gb);

  ComplexTensor gs1 = grad_through_conv2(gv2, params.w2, sh.k1);
  if (!cache.res.out.empty()) {
    ResidualGrads res = residual_block_backward(
        params.r1, params.r2, cache.s1, cache.res, gs1, cache.conv_kind,
        crelu_mode);
    gs1 = std::move(res.gs);
    g.gr1 = std::move(res.gr1);
    g.gr2 = std::move(res.gr2);
  }

  ComplexTensor gv1;
  gv1.reserve(sh.k1);
  for (std::size_t p = 0; p < sh.k1; ++p) {
    ComplexMatrix go1 = upsample(gs1[p], sh.g, sh.v1_rows, sh.v1_cols);
    gv1.push_back(
        activation_backward(cache.conv_kind, go1, cache.v1[p], crelu_mode));
  }

  ConvLayerGrads conv1 = grad_conv1(cache.input, gv1);
  g.gw1 = std::move(conv1.gw);
  g.gb1 = std::move(conv1.gb);
  return g;
}

}  // namespace cvnet
