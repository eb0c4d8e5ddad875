#pragma once

#include <cstddef>

#include "cvnet/complex_matrix.hpp"
#include "cvnet/layers.hpp"

namespace cvnet {

// Split representation of a complex tensor: x holds the real planes, y the
// imaginary planes, in matching order. Planes are stored as ComplexMatrix
// with zero imaginary parts so they can flow through conv_valid in real mode.
struct SplitTensor {
  ComplexTensor x;
  ComplexTensor y;
};

// Split kernel stack: W = A + jB, plane(ki, ko) = ki * out_planes + ko.
struct SplitKernel {
  ComplexTensor a;
  ComplexTensor b;
  std::size_t in_planes = 1;
  std::size_t out_planes = 1;
};

SplitTensor split_encode(const ComplexTensor& t);
ComplexTensor split_decode(const SplitTensor& s);
SplitKernel split_kernel(const ComplexTensor& kernels, std::size_t in_planes,
                         std::size_t out_planes);

// Complex convolution simulated with four real convolutions per plane pair:
//   re = conv(x, A) - conv(y, B)
//   im = conv(x, B) + conv(y, A)
// summed over input planes; each conv is conv_valid in real mode.
SplitTensor sim_conv(const SplitTensor& h, const SplitKernel& w);

// Same-padded variant: inputs are zero-padded by (d - 1) / 2 on every side
// before the valid convolution; the kernel size d must be odd.
SplitTensor sim_conv_same(const SplitTensor& h, const SplitKernel& w);

// Residual block: out = s + Conv(Act(Conv(Act(s)))) with bias-free
// same-padded convolutions (the normalization slot is the identity).
SplitTensor residual_block_forward(const SplitTensor& s, const SplitKernel& k1,
                                   const SplitKernel& k2,
                                   const ActivationKind& kind);

// Complex-domain residual block with cached intermediates for backward.
// a1 = Act(s), c1 = SameConv(a1, r1), a2 = Act(c1), out = s + SameConv(a2, r2).
struct ResidualCache {
  ComplexTensor a1;
  ComplexTensor c1;
  ComplexTensor a2;
  ComplexTensor out;
};
ResidualCache residual_forward_cached(const ComplexTensor& s,
                                      const ComplexTensor& r1,
                                      const ComplexTensor& r2,
                                      const ActivationKind& kind);

// Bias-free same-padded complex convolution layer used by the block.
ComplexTensor same_conv(const ComplexTensor& input,
                        const ComplexTensor& kernels, std::size_t out_planes);

}  // namespace cvnet
