#include "cvnet/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace cvnet {

namespace {

void require_finite(const GradientSet& g, const char* who) {
  if (!all_finite(g))
    throw std::runtime_error(std::string(who) +
                             ": non-finite gradient, step aborted");
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

Optimizer::Optimizer(const NetworkParams& params, double lr_, double momentum_,
                     double lambda_, Reg reg_)
    : lr(lr_), momentum(momentum_), lambda(lambda_), reg(reg_),
      velocity(zero_gradients(params)) {}

void sgd_step(NetworkParams& params, const GradientSet& g, double lr) {
  require_finite(g, "sgd_step");
  for_each_param_pair(params, const_cast<GradientSet&>(g),
                      [lr](const ParamCoord&, Complex& p, Complex& gv) {
                        p = {p.real() - lr * gv.real(),
                             p.imag() - lr * gv.imag()};
                      });
}

void momentum_step(NetworkParams& params, Optimizer& opt,
                   const GradientSet& g) {
  if (opt.momentum == 0.0) {
    sgd_step(params, g, opt.lr);
    return;
  }
  require_finite(g, "momentum_step");
  const double lr = opt.lr, mu = opt.momentum;
  auto step_tensor = [lr, mu](ComplexTensor& pt, ComplexTensor& vt,
                              const ComplexTensor& gt) {
    for (std::size_t pl = 0; pl < pt.size(); ++pl)
      for (std::size_t n = 0; n < pt[pl].size(); ++n) {
        Complex& v = vt[pl].data()[n];
        const Complex& gv = gt[pl].data()[n];
        v = {-lr * gv.real() + mu * v.real(), -lr * gv.imag() + mu * v.imag()};
        Complex& p = pt[pl].data()[n];
        p = {p.real() + v.real(), p.imag() + v.imag()};
      }
  };
  auto step_vector = [lr, mu](std::vector<Complex>& pv,
                              std::vector<Complex>& vv,
                              const std::vector<Complex>& gv) {
    for (std::size_t n = 0; n < pv.size(); ++n) {
      Complex& v = vv[n];
      v = {-lr * gv[n].real() + mu * v.real(),
           -lr * gv[n].imag() + mu * v.imag()};
      pv[n] = {pv[n].real() + v.real(), pv[n].imag() + v.imag()};
    }
  };
  step_tensor(params.w1, opt.velocity.gw1, g.gw1);
  step_vector(params.b1, opt.velocity.gb1, g.gb1);
  step_tensor(params.w2, opt.velocity.gw2, g.gw2);
  step_vector(params.b2, opt.velocity.gb2, g.gb2);
  step_vector(params.w3, opt.velocity.gw3, g.gw3);
  {
    Complex& v = opt.velocity.gb3;
    v = {-lr * g.gb3.real() + mu * v.real(), -lr * g.gb3.imag() + mu * v.imag()};
    params.b3 = {params.b3.real() + v.real(), params.b3.imag() + v.imag()};
  }
  step_tensor(params.r1, opt.velocity.gr1, g.gr1);
  step_tensor(params.r2, opt.velocity.gr2, g.gr2);
}

void apply_weight_decay(NetworkParams& params, GradientSet& g, double lr,
                        double lambda, std::size_t batch_size, Reg reg) {
  if (reg == Reg::None || lambda == 0.0) return;
  if (batch_size == 0)
    throw std::invalid_argument("apply_weight_decay: empty batch");
  const double rate = lr * lambda / static_cast<double>(batch_size);
  if (rate >= 1.0)
    throw std::invalid_argument(
        "apply_weight_decay: lr * lambda / batch_size must be < 1");
  if (reg == Reg::L2) {
    const double keep = 1.0 - rate;
    auto scale_tensor = [keep](ComplexTensor& t) {
      for (auto& p : t)
        for (auto& z : p) z = {z.real() * keep, z.imag() * keep};
    };
    auto scale_vector = [keep](std::vector<Complex>& v) {
      for (auto& z : v) z = {z.real() * keep, z.imag() * keep};
    };
    scale_tensor(params.w1);
    scale_tensor(params.w2);
    scale_vector(params.w3);
    scale_tensor(params.r1);
    scale_tensor(params.r2);
    return;
  }
  // L1: augment weight gradients, leave biases alone.
  const double c = lambda / static_cast<double>(batch_size);
  auto augment_tensor = [c](ComplexTensor& gt, const ComplexTensor& pt) {
    for (std::size_t pl = 0; pl < gt.size(); ++pl)
      for (std::size_t n = 0; n < gt[pl].size(); ++n) {
        const Complex& p = pt[pl].data()[n];
        Complex& z = gt[pl].data()[n];
        z = {z.real() + c * sign(p.real()), z.imag() + c * sign(p.imag())};
      }
  };
  auto augment_vector = [c](std::vector<Complex>& gvec,
                            const std::vector<Complex>& pvec) {
    for (std::size_t n = 0; n < gvec.size(); ++n)
      gvec[n] = {gvec[n].real() + c * sign(pvec[n].real()),
                 gvec[n].imag() + c * sign(pvec[n].imag())};
  };
  augment_tensor(g.gw1, params.w1);
  augment_tensor(g.gw2, params.w2);
  augment_vector(g.gw3, params.w3);
  augment_tensor(g.gr1, params.r1);
  augment_tensor(g.gr2, params.r2);
}

}  // namespace cvnet
