#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvnet/complex_matrix.hpp"

namespace cvnet {

// Complex activations operate on both components; real-mode kinds require
// every input entry to have a zero imaginary part and reject anything else.
enum class Activation {
  CReLU,         // ReLU(re) + j ReLU(im)
  ZReLU,         // z where arg(z) in [0, pi/2], else 0
  SplitSigmoid,  // sigmoid(re) + j sigmoid(im)
  SplitTanh,     // tanh(re) + j tanh(im)
  RealReLU,      // real mode only
  LeakyReLU,     // real mode only, slope alpha on the negative side
  ParametricReLU,  // real mode only, fixed per-run slope alpha
  ELU,           // real mode only, alpha * (e^x - 1) on the negative side
};

struct ActivationKind {
  Activation fn = Activation::CReLU;
  double alpha = 0.01;  // used by LeakyReLU, ParametricReLU, ELU
};

bool is_real_kind(Activation fn);
std::string activation_name(const ActivationKind& kind);

// Derivative mode for CReLU only; other kinds ignore it.
//   Joint: scalar gate, 1 where sign(re) == sign(im) and neither is 0.
//   Split: per-component, 1[re > 0] + j 1[im > 0] (the calculus derivative).
enum class CReluDeriv { Joint, Split };

// Elementwise activation. Boundary convention for derivative gates: exact
// zeros produce a zero gate component.
ComplexMatrix activation(const ActivationKind& kind, const ComplexMatrix& v);
Complex activation_scalar(const ActivationKind& kind, Complex v);

// Elementwise derivative object. For split kinds the result holds the two
// component derivatives as re and im; for gated kinds (CReLU Joint, zReLU)
// it is a real 0/1 gate.
ComplexMatrix activation_deriv(const ActivationKind& kind,
                               const ComplexMatrix& v,
                               CReluDeriv mode = CReluDeriv::Joint);
Complex activation_deriv_scalar(const ActivationKind& kind, Complex v,
                                CReluDeriv mode = CReluDeriv::Joint);

// Architecture hyper-parameters plus every derived dimension of the
// two-conv-layer network. Derivation rules:
//   V1 = (alpha - d1 + 1, beta - d1 + 1)     valid conv
//   S1 = (floor(V1r / g), floor(V1c / g))    non-overlapping average pooling
//   V2 = (S1r - d2 + 1, S1c - d2 + 1)
//   S2 = (floor(V2r / g), floor(V2c / g))
//   fc = S2r * S2c * k2
// Construction fails if any derived dimension is not >= 1.
struct LayerShapes {
  std::size_t alpha = 0, beta = 0;  // input rows, cols
  std::size_t d1 = 0, d2 = 0;       // square kernel sizes
  std::size_t k1 = 0, k2 = 0;       // plane counts after conv1 / conv2
  std::size_t g = 0;                // pooling window and stride

  std::size_t v1_rows = 0, v1_cols = 0;
  std::size_t s1_rows = 0, s1_cols = 0;
  std::size_t v2_rows = 0, v2_cols = 0;
  std::size_t s2_rows = 0, s2_cols = 0;
  std::size_t fc = 0;

  static LayerShapes derive(std::size_t alpha, std::size_t beta,
                            std::size_t d1, std::size_t d2, std::size_t k1,
                            std::size_t k2, std::size_t g);
};

// One convolution layer. kernels holds in_planes * out_planes planes indexed
// plane(ki, ko) = ki * out_planes + ko (0-based), each the same square size;
// biases has out_planes entries, each added once per output element.
//   V[ko] = sum_ki conv_valid(input[ki], kernels[ki * out + ko]) + b[ko]
//   O[ko] = activation(V[ko])
struct ConvLayerOut {
  ComplexTensor v;
  ComplexTensor o;
};
ConvLayerOut conv_layer_forward(const ComplexTensor& input,
                                const ComplexTensor& kernels,
                                const std::vector<Complex>& biases,
                                const ActivationKind& kind);

// Non-overlapping g x g average pooling; trailing rows/cols that do not fill
// a window are dropped. Output dims floor(rows/g) x floor(cols/g), both >= 1.
ComplexMatrix avgpool_forward(const ComplexMatrix& o, std::size_t g);

// Column-major within each plane, planes concatenated in order.
std::vector<Complex> flatten(const ComplexTensor& s);
ComplexTensor unflatten(const std::vector<Complex>& f, std::size_t rows,
                        std::size_t cols, std::size_t planes);

// Fully connected head: V3 = sum_k w3[k] * f[k] + b3, yhat = activation(V3).
struct DenseOut {
  Complex v3;
  Complex yhat;
};
DenseOut dense_forward(const std::vector<Complex>& w3,
                       const std::vector<Complex>& f, Complex b3,
                       const ActivationKind& kind);

enum class Variant { FullCV, CVForwardCNN, CVForwardResidual, RVSplit };
std::string variant_name(Variant v);

// Trainable parameters. w1 has input_planes * k1 planes of d1 x d1, w2 has
// k1 * k2 planes of d2 x d2, w3 has fc entries. The residual variant adds
// two bias-free block kernel stacks r1, r2 of k1 * k1 planes, d2 x d2 each.
// RVSplit keeps every imaginary part exactly zero.
struct NetworkParams {
  Variant variant = Variant::FullCV;
  std::size_t input_planes = 1;
  LayerShapes shapes;
  ComplexTensor w1;
  std::vector<Complex> b1;
  ComplexTensor w2;
  std::vector<Complex> b2;
  std::vector<Complex> w3;
  Complex b3{0.0, 0.0};
  ComplexTensor r1;
  ComplexTensor r2;

  bool real_mode() const { return variant == Variant::RVSplit; }
};

// Seeded initialization: weight components i.i.d. uniform on [0, 1] for both
// re and im, biases exactly zero. Draw order is fixed (w1 planes in order,
// row-major entries, re then im; then w2, w3, and residual stacks). RVSplit
// draws the same stream and zeroes the imaginary parts.
NetworkParams init_params(const LayerShapes& shapes, std::uint64_t seed);
NetworkParams init_params(const LayerShapes& shapes, std::uint64_t seed,
                          Variant variant);

}  // namespace cvnet
