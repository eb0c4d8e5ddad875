#include "cvnet/verify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "cvnet/rng.hpp"
#include "cvnet/simcv.hpp"
#include "cvnet/train.hpp"

namespace cvnet {

ComplexMatrix conv_oracle(const ComplexMatrix& a, const ComplexMatrix& k) {
  if (a.empty() || k.empty())
    throw std::invalid_argument("conv_oracle: empty operand");
  if (k.rows() > a.rows() || k.cols() > a.cols())
    throw std::invalid_argument("conv_oracle: kernel exceeds input");
  const std::size_t dr = k.rows(), dc = k.cols();
  ComplexMatrix out(a.rows() - dr + 1, a.cols() - dc + 1);
  for (std::size_t i = 1; i <= out.rows(); ++i)
    for (std::size_t j = 1; j <= out.cols(); ++j) {
      double acc_re = 0.0, acc_im = 0.0;
      for (std::size_t u = 0; u < dr; ++u)
        for (std::size_t v = 0; v < dc; ++v) {
          const Complex az = a(i + u, j + v);
          const Complex kz = k(dr - u, dc - v);
          acc_re += az.real() * kz.real() - az.imag() * kz.imag();
          acc_im += az.real() * kz.imag() + az.imag() * kz.real();
        }
      out(i, j) = Complex(acc_re, acc_im);
    }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, std::size_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double rel_error(double a, double n) {
  const double denom = std::max(std::abs(a), std::abs(n));
  if (denom > 1e-8) return std::abs(a - n) / denom;
  return std::abs(a - n);
}

// Pre-activation components within eps of a CReLU/zReLU gate boundary make
// finite differences unreliable there; the report notes them.
std::size_t count_boundary_hits(const ForwardCache& c, double eps) {
  std::size_t hits = 0;
  auto scan = [&](const ComplexTensor& t) {
    for (const ComplexMatrix& m : t)
      for (const Complex& z : m) {
        if (std::abs(z.real()) < eps) ++hits;
        if (std::abs(z.imag()) < eps) ++hits;
      }
  };
  scan(c.v1);
  scan(c.v2);
  return hits;
}

}  // namespace

std::string GradCheckReport::csv_header() {
  return "tensor,plane,i,j,part,analytic,numeric,rel_err";
}

std::string GradCheckReport::to_csv() const {
  std::string out = csv_header();
  out += '\n';
  for (const GradCheckRow& r : rows) {
    out += r.tensor;
    out += ',';
    append_number(out, r.plane);
    out += ',';
    append_number(out, r.i);
    out += ',';
    append_number(out, r.j);
    out += ',';
    out += r.part;
    out += ',';
    append_number(out, r.analytic);
    out += ',';
    append_number(out, r.numeric);
    out += ',';
    append_number(out, r.rel_err);
    out += '\n';
  }
  return out;
}

GradCheckReport fd_gradcheck(const LayerShapes& shapes, Variant variant,
                             const ActivationKind& conv_kind,
                             CReluDeriv crelu_mode, std::uint64_t seed,
                             double h, double threshold,
                             const BackwardFn& backward) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradcheck: h must be > 0");
  const ActivationKind dense_kind{Activation::SplitSigmoid, 0.01};
  const Complex y{1.0, 0.0};

  NetworkParams params = init_params(shapes, seed, variant);
  Rng rng(derive_seed(seed, 777));
  ComplexMatrix probe(shapes.alpha, shapes.beta);
  for (Complex& z : probe) z = Complex(rng.uniform(), rng.uniform());

  const ForwardCache cache =
      forward_sample(params, probe, conv_kind, dense_kind);
  const GradientSet grads =
      backward ? backward(params, cache, y, LossGradMode::Signed, crelu_mode)
               : backward_sample(params, cache, y, LossGradMode::Signed,
                                 crelu_mode);

  NetworkParams work = params;
  std::vector<ParamCoord> coords;
  std::vector<Complex*> slots;
  std::vector<Complex> analytic;
  for_each_param_pair(work, grads,
                      [&](const ParamCoord& c, Complex& pz, const Complex& gz) {
                        coords.push_back(c);
                        slots.push_back(&pz);
                        analytic.push_back(gz);
                      });

  const auto loss_at = [&]() {
    const ForwardCache c = forward_sample(work, probe, conv_kind, dense_kind);
    return loss(y, c.yhat);
  };

  GradCheckReport report;
  report.threshold = threshold;
  for (std::size_t e = 0; e < slots.size(); ++e) {
    const Complex saved = *slots[e];
    for (const char part : {'r', 'i'}) {
      const double a =
          part == 'r' ? analytic[e].real() : analytic[e].imag();
      const Complex plus = part == 'r' ? saved + Complex(h, 0.0)
                                       : saved + Complex(0.0, h);
      const Complex minus = part == 'r' ? saved - Complex(h, 0.0)
                                        : saved - Complex(0.0, h);
      *slots[e] = plus;
      const double lp = loss_at();
      *slots[e] = minus;
      const double lm = loss_at();
      *slots[e] = saved;
      const double n = (lp - lm) / (2.0 * h);
      GradCheckRow row;
      row.tensor = coords[e].tensor;
      row.plane = coords[e].plane;
      row.i = coords[e].i;
      row.j = coords[e].j;
      row.part = part;
      row.analytic = a;
      row.numeric = n;
      row.rel_err = rel_error(a, n);
      report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
      report.rows.push_back(std::move(row));
    }
  }
  report.pass = report.max_rel_err < threshold;

  if (conv_kind.fn == Activation::CReLU || conv_kind.fn == Activation::ZReLU) {
    const std::size_t hits = count_boundary_hits(cache, 1e-3);
    if (hits > 0) {
      report.note = "gate boundary proximity: ";
      append_number(report.note, hits);
      report.note += " pre-activation components within 1e-3";
    }
  }
  return report;
}

SimEquivReport sim_equiv_check(std::size_t trials, std::uint64_t seed,
                               double tol) {
  if (trials == 0)
    throw std::invalid_argument("sim_equiv_check: trials must be >= 1");
  Rng rng(seed);
  SimEquivReport report;
  report.trials = trials;
  report.tol = tol;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t rows = 1 + rng.below(10);
    const std::size_t cols = 1 + rng.below(10);
    const std::size_t dr = 1 + rng.below(std::min<std::size_t>(4, rows));
    const std::size_t dc = 1 + rng.below(std::min<std::size_t>(4, cols));
    const std::size_t in_planes = 1 + rng.below(2);
    const std::size_t out_planes = 1 + rng.below(2);

    ComplexTensor input;
    for (std::size_t p = 0; p < in_planes; ++p) {
      ComplexMatrix m(rows, cols);
      for (Complex& z : m)
        z = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      input.push_back(std::move(m));
    }
    ComplexTensor kernels;
    for (std::size_t p = 0; p < in_planes * out_planes; ++p) {
      ComplexMatrix m(dr, dc);
      for (Complex& z : m)
        z = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      kernels.push_back(std::move(m));
    }

    const SplitTensor sim =
        sim_conv(split_encode(input), split_kernel(kernels, in_planes, out_planes));
    const ComplexTensor sim_out = split_decode(sim);

    for (std::size_t ko = 0; ko < out_planes; ++ko) {
      ComplexMatrix direct = conv_valid(input[0], kernels[ko]);
      for (std::size_t ki = 1; ki < in_planes; ++ki)
        direct = axpy(Complex(1.0, 0.0),
                      conv_valid(input[ki], kernels[ki * out_planes + ko]),
                      direct);
      report.max_diff =
          std::max(report.max_diff, max_abs_diff(direct, sim_out[ko]));
    }
  }
  report.pass = report.max_diff <= tol;
  return report;
}

CRReport cauchy_riemann_check(const std::function<Complex(Complex)>& fn,
                              const std::string& name,
                              const std::vector<Complex>& points, double h,
                              double tol) {
  if (!fn) throw std::invalid_argument("cauchy_riemann_check: null function");
  if (points.empty())
    throw std::invalid_argument("cauchy_riemann_check: no points");
  if (!(h > 0.0))
    throw std::invalid_argument("cauchy_riemann_check: h must be > 0");
  CRReport report;
  report.name = name;
  report.points = points.size();
  report.tol = tol;
  for (const Complex z : points) {
    const Complex fx_p = fn(z + Complex(h, 0.0));
    const Complex fx_m = fn(z - Complex(h, 0.0));
    const Complex fy_p = fn(z + Complex(0.0, h));
    const Complex fy_m = fn(z - Complex(0.0, h));
    const double ux = (fx_p.real() - fx_m.real()) / (2.0 * h);
    const double vx = (fx_p.imag() - fx_m.imag()) / (2.0 * h);
    const double uy = (fy_p.real() - fy_m.real()) / (2.0 * h);
    const double vy = (fy_p.imag() - fy_m.imag()) / (2.0 * h);
    const double scale = std::max(
        {1.0, std::abs(ux), std::abs(vx), std::abs(uy), std::abs(vy)});
    const double residual =
        std::max(std::abs(ux - vy), std::abs(uy + vx)) / scale;
    report.max_residual = std::max(report.max_residual, residual);
  }
  report.pass = report.max_residual <= tol;
  return report;
}

std::vector<Complex> cr_random_points(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("cr_random_points: n must be >= 1");
  Rng rng(seed);
  std::vector<Complex> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 0.5 + 1.5 * rng.uniform();
    const double theta = 2.0 * 3.14159265358979323846 * rng.uniform();
    pts.emplace_back(r * std::cos(theta), r * std::sin(theta));
  }
  return pts;
}

}  // namespace cvnet
