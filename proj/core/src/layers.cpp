#include "cvnet/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "cvnet/rng.hpp"

namespace cvnet {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar real activations; inputs to these kinds must be purely real.
double real_fn(const ActivationKind& kind, double x) {
  switch (kind.fn) {
    case Activation::RealReLU:
      return x >= 0.0 ? x : 0.0;
    case Activation::LeakyReLU:
    case Activation::ParametricReLU:
      return x >= 0.0 ? x : kind.alpha * x;
    case Activation::ELU:
      return x >= 0.0 ? x : kind.alpha * (std::exp(x) - 1.0);
    default:
      throw std::logic_error("real_fn: not a real kind");
  }
}

// Negative-side slope applies at exactly zero (left limit); RealReLU keeps
// the zero-boundary gate convention.
double real_deriv(const ActivationKind& kind, double x) {
  switch (kind.fn) {
    case Activation::RealReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyReLU:
    case Activation::ParametricReLU:
      return x > 0.0 ? 1.0 : kind.alpha;
    case Activation::ELU:
      return x > 0.0 ? 1.0 : kind.alpha * std::exp(x);
    default:
      throw std::logic_error("real_deriv: not a real kind");
  }
}

void require_real(const ActivationKind& kind, Complex v) {
  if (v.imag() != 0.0)
    throw std::invalid_argument(activation_name(kind) +
                                ": complex input to a real-mode activation");
}

}  // namespace

bool is_real_kind(Activation fn) {
  switch (fn) {
    case Activation::RealReLU:
    case Activation::LeakyReLU:
    case Activation::ParametricReLU:
    case Activation::ELU:
      return true;
    default:
      return false;
  }
}

std::string activation_name(const ActivationKind& kind) {
  switch (kind.fn) {
    case Activation::CReLU: return "crelu";
    case Activation::ZReLU: return "zrelu";
    case Activation::SplitSigmoid: return "split-sigmoid";
    case Activation::SplitTanh: return "split-tanh";
    case Activation::RealReLU: return "relu";
    case Activation::LeakyReLU: return "lrelu";
    case Activation::ParametricReLU: return "prelu";
    case Activation::ELU: return "elu";
  }
  return "unknown";
}

Complex activation_scalar(const ActivationKind& kind, Complex v) {
  switch (kind.fn) {
    case Activation::CReLU:
      return {v.real() > 0.0 ? v.real() : 0.0, v.imag() > 0.0 ? v.imag() : 0.0};
    case Activation::ZReLU:
      return (v.real() >= 0.0 && v.imag() >= 0.0) ? v : Complex{0.0, 0.0};
    case Activation::SplitSigmoid:
      return {sigmoid(v.real()), sigmoid(v.imag())};
    case Activation::SplitTanh:
      return {std::tanh(v.real()), std::tanh(v.imag())};
    default:
      require_real(kind, v);
      return {real_fn(kind, v.real()), 0.0};
  }
}

Complex activation_deriv_scalar(const ActivationKind& kind, Complex v,
                                CReluDeriv mode) {
  switch (kind.fn) {
    case Activation::CReLU: {
      if (mode == CReluDeriv::Joint) {
        bool on = (v.real() > 0.0 && v.imag() > 0.0) ||
                  (v.real() < 0.0 && v.imag() < 0.0);
        return {on ? 1.0 : 0.0, 0.0};
      }
      return {v.real() > 0.0 ? 1.0 : 0.0, v.imag() > 0.0 ? 1.0 : 0.0};
    }
    case Activation::ZReLU: {
      bool on = v.real() >= 0.0 && v.imag() >= 0.0;
      return {on ? 1.0 : 0.0, 0.0};
    }
    case Activation::SplitSigmoid: {
      double sr = sigmoid(v.real()), si = sigmoid(v.imag());
      return {sr * (1.0 - sr), si * (1.0 - si)};
    }
    case Activation::SplitTanh: {
      double tr = std::tanh(v.real()), ti = std::tanh(v.imag());
      return {1.0 - tr * tr, 1.0 - ti * ti};
    }
    default: {
      require_real(kind, v);
      // The imaginary channel of a real-mode layer is identically zero; its
      // derivative component uses the same scalar rule at zero.
      return {real_deriv(kind, v.real()), real_deriv(kind, 0.0)};
    }
  }
}

ComplexMatrix activation(const ActivationKind& kind, const ComplexMatrix& v) {
  ComplexMatrix out(v.rows(), v.cols());
  for (std::size_t n = 0; n < v.size(); ++n)
    out.data()[n] = activation_scalar(kind, v.data()[n]);
  return out;
}

ComplexMatrix activation_deriv(const ActivationKind& kind,
                               const ComplexMatrix& v, CReluDeriv mode) {
  ComplexMatrix out(v.rows(), v.cols());
  for (std::size_t n = 0; n < v.size(); ++n)
    out.data()[n] = activation_deriv_scalar(kind, v.data()[n], mode);
  return out;
}

LayerShapes LayerShapes::derive(std::size_t alpha, std::size_t beta,
                                std::size_t d1, std::size_t d2, std::size_t k1,
                                std::size_t k2, std::size_t g) {
  if (alpha == 0 || beta == 0 || d1 == 0 || d2 == 0 || k1 == 0 || k2 == 0 ||
      g == 0)
    throw std::invalid_argument("LayerShapes: all parameters must be >= 1");
  LayerShapes s;
  s.alpha = alpha;
  s.beta = beta;
  s.d1 = d1;
  s.d2 = d2;
  s.k1 = k1;
  s.k2 = k2;
  s.g = g;
  if (d1 > alpha || d1 > beta)
    throw std::invalid_argument("LayerShapes: conv1 kernel exceeds input");
  s.v1_rows = alpha - d1 + 1;
  s.v1_cols = beta - d1 + 1;
  s.s1_rows = s.v1_rows / g;
  s.s1_cols = s.v1_cols / g;
  if (s.s1_rows == 0 || s.s1_cols == 0)
    throw std::invalid_argument("LayerShapes: pool1 output dim is 0");
  if (d2 > s.s1_rows || d2 > s.s1_cols)
    throw std::invalid_argument("LayerShapes: conv2 kernel exceeds pool1");
  s.v2_rows = s.s1_rows - d2 + 1;
  s.v2_cols = s.s1_cols - d2 + 1;
  s.s2_rows = s.v2_rows / g;
  s.s2_cols = s.v2_cols / g;
  if (s.s2_rows == 0 || s.s2_cols == 0)
    throw std::invalid_argument("LayerShapes: pool2 output dim is 0");
  s.fc = s.s2_rows * s.s2_cols * k2;
  return s;
}

ConvLayerOut conv_layer_forward(const ComplexTensor& input,
                                const ComplexTensor& kernels,
                                const std::vector<Complex>& biases,
                                const ActivationKind& kind) {
  if (input.empty()) throw std::invalid_argument("conv_layer_forward: empty input");
  if (biases.empty())
    throw std::invalid_argument("conv_layer_forward: empty biases");
  const std::size_t kin = input.size();
  const std::size_t kout = biases.size();
  if (kernels.size() != kin * kout)
    throw std::invalid_argument(
        "conv_layer_forward: kernel plane count must be in_planes * out_planes");
  for (const auto& p : input)
    if (!p.same_dims(input[0]))
      throw std::invalid_argument("conv_layer_forward: ragged input planes");
  for (const auto& p : kernels)
    if (!p.same_dims(kernels[0]))
      throw std::invalid_argument("conv_layer_forward: ragged kernel planes");

  ConvLayerOut out;
  out.v.reserve(kout);
  out.o.reserve(kout);
  for (std::size_t ko = 0; ko < kout; ++ko) {
    ComplexMatrix v = conv_valid(input[0], kernels[ko]);
    for (std::size_t ki = 1; ki < kin; ++ki)
      v = axpy(Complex{1.0, 0.0}, conv_valid(input[ki], kernels[ki * kout + ko]),
               v);
    for (auto& z : v) z += biases[ko];
    out.o.push_back(activation(kind, v));
    out.v.push_back(std::move(v));
  }
  return out;
}

ComplexMatrix avgpool_forward(const ComplexMatrix& o, std::size_t g) {
  if (g == 0) throw std::invalid_argument("avgpool_forward: g must be >= 1");
  const std::size_t rows = o.rows() / g, cols = o.cols() / g;
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("avgpool_forward: output dim would be 0");
  const double inv = 1.0 / static_cast<double>(g * g);
  ComplexMatrix out(rows, cols);
  for (std::size_t i = 1; i <= rows; ++i) {
    for (std::size_t j = 1; j <= cols; ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t u = 0; u < g; ++u)
        for (std::size_t v = 0; v < g; ++v)
          acc += o((i - 1) * g + u + 1, (j - 1) * g + v + 1);
      out(i, j) = acc * inv;
    }
  }
  return out;
}

std::vector<Complex> flatten(const ComplexTensor& s) {
  std::vector<Complex> f;
  std::size_t total = 0;
  for (const auto& p : s) total += p.size();
  f.reserve(total);
  for (const auto& p : s)
    for (std::size_t j = 1; j <= p.cols(); ++j)
      for (std::size_t i = 1; i <= p.rows(); ++i) f.push_back(p(i, j));
  return f;
}

ComplexTensor unflatten(const std::vector<Complex>& f, std::size_t rows,
                        std::size_t cols, std::size_t planes) {
  if (f.size() != rows * cols * planes)
    throw std::invalid_argument("unflatten: size mismatch");
  ComplexTensor s;
  s.reserve(planes);
  std::size_t n = 0;
  for (std::size_t p = 0; p < planes; ++p) {
    ComplexMatrix m(rows, cols);
    for (std::size_t j = 1; j <= cols; ++j)
      for (std::size_t i = 1; i <= rows; ++i) m(i, j) = f[n++];
    s.push_back(std::move(m));
  }
  return s;
}

DenseOut dense_forward(const std::vector<Complex>& w3,
                       const std::vector<Complex>& f, Complex b3,
                       const ActivationKind& kind) {
  if (w3.size() != f.size())
    throw std::invalid_argument("dense_forward: weight/feature size mismatch");
  Complex v3 = b3;
  for (std::size_t k = 0; k < w3.size(); ++k) v3 += w3[k] * f[k];
  return {v3, activation_scalar(kind, v3)};
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::FullCV: return "full-cv";
    case Variant::CVForwardCNN: return "cv-forward";
    case Variant::CVForwardResidual: return "cv-residual";
    case Variant::RVSplit: return "rv-split";
  }
  return "unknown";
}

namespace {

ComplexTensor draw_planes(Rng& rng, std::size_t count, std::size_t rows,
                          std::size_t cols, bool real_only) {
  ComplexTensor t;
  t.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    ComplexMatrix m(rows, cols);
    for (auto& z : m) {
      double re = rng.uniform();
      double im = rng.uniform();
      z = {re, real_only ? 0.0 : im};
    }
    t.push_back(std::move(m));
  }
  return t;
}

}  // namespace

NetworkParams init_params(const LayerShapes& shapes, std::uint64_t seed,
                          Variant variant) {
  NetworkParams p;
  p.variant = variant;
  p.input_planes = variant == Variant::RVSplit ? 2 : 1;
  p.shapes = shapes;
  const bool real_only = variant == Variant::RVSplit;
  Rng rng(seed);
  p.w1 = draw_planes(rng, p.input_planes * shapes.k1, shapes.d1, shapes.d1,
                     real_only);
  p.b1.assign(shapes.k1, Complex{0.0, 0.0});
  p.w2 = draw_planes(rng, shapes.k1 * shapes.k2, shapes.d2, shapes.d2,
                     real_only);
  p.b2.assign(shapes.k2, Complex{0.0, 0.0});
  p.w3.resize(shapes.fc);
  for (auto& z : p.w3) {
    double re = rng.uniform();
    double im = rng.uniform();
    z = {re, real_only ? 0.0 : im};
  }
  p.b3 = {0.0, 0.0};
  if (variant == Variant::CVForwardResidual) {
    if (shapes.d2 % 2 == 0)
      throw std::invalid_argument(
          "init_params: residual block kernel size must be odd");
    p.r1 = draw_planes(rng, shapes.k1 * shapes.k1, shapes.d2, shapes.d2, false);
    p.r2 = draw_planes(rng, shapes.k1 * shapes.k1, shapes.d2, shapes.d2, false);
  }
  return p;
}

NetworkParams init_params(const LayerShapes& shapes, std::uint64_t seed) {
  return init_params(shapes, seed, Variant::FullCV);
}

}  // namespace cvnet
