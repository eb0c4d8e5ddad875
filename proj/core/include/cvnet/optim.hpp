#pragma once

#include <cstddef>

#include "cvnet/backprop.hpp"
#include "cvnet/layers.hpp"

namespace cvnet {

enum class Reg { None, L1, L2 };

// Mini-batch SGD with optional classical momentum and weight decay. The
// velocity buffer mirrors the parameter shapes and starts at zero.
struct Optimizer {
  double lr = 1e-3;
  double momentum = 0.0;
  double lambda = 0.0;
  Reg reg = Reg::None;
  GradientSet velocity;

  Optimizer() = default;
  Optimizer(const NetworkParams& params, double lr_, double momentum_ = 0.0,
            double lambda_ = 0.0, Reg reg_ = Reg::None);
};

// p <- p - lr * g for every parameter component. Rejects non-finite
// gradients before touching any parameter.
void sgd_step(NetworkParams& params, const GradientSet& g, double lr);

// velocity <- -lr * g + momentum * velocity; p <- p + velocity.
// With momentum == 0 this takes the sgd_step path, bit for bit.
void momentum_step(NetworkParams& params, Optimizer& opt, const GradientSet& g);

// Weight decay for one batch of size batch_size, applied around the step:
//   L2: weights pre-scaled by (1 - lr * lambda / batch_size), biases exempt;
//       gradients untouched.
//   L1: weight gradients augmented by (lambda / batch_size) * sign per real
//       component with sign(0) = 0, biases exempt; parameters untouched.
// Rejects lr * lambda / batch_size >= 1.
void apply_weight_decay(NetworkParams& params, GradientSet& g, double lr,
                        double lambda, std::size_t batch_size, Reg reg);

}  // namespace cvnet
