#include "cvnet/simcv.hpp"

#include <stdexcept>

namespace cvnet {

namespace {

ComplexMatrix component(const ComplexMatrix& m, bool imag_part) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t n = 0; n < m.size(); ++n)
    out.data()[n] = {imag_part ? m.data()[n].imag() : m.data()[n].real(), 0.0};
  return out;
}

void require_real_planes(const ComplexTensor& t, const char* what) {
  for (const auto& p : t)
    for (const auto& z : p)
      if (z.imag() != 0.0)
        throw std::invalid_argument(std::string(what) +
                                    ": split planes must be real");
}

ComplexTensor pad_planes(const ComplexTensor& t, std::size_t m) {
  ComplexTensor out;
  out.reserve(t.size());
  for (const auto& p : t) out.push_back(zeropad(p, m, m, m, m));
  return out;
}

}  // namespace

SplitTensor split_encode(const ComplexTensor& t) {
  SplitTensor s;
  s.x.reserve(t.size());
  s.y.reserve(t.size());
  for (const auto& p : t) {
    s.x.push_back(component(p, false));
    s.y.push_back(component(p, true));
  }
  return s;
}

ComplexTensor split_decode(const SplitTensor& s) {
  if (s.x.size() != s.y.size())
    throw std::invalid_argument("split_decode: plane count mismatch");
  ComplexTensor t;
  t.reserve(s.x.size());
  for (std::size_t p = 0; p < s.x.size(); ++p) {
    if (!s.x[p].same_dims(s.y[p]))
      throw std::invalid_argument("split_decode: plane dim mismatch");
    ComplexMatrix m(s.x[p].rows(), s.x[p].cols());
    for (std::size_t n = 0; n < m.size(); ++n)
      m.data()[n] = {s.x[p].data()[n].real(), s.y[p].data()[n].real()};
    t.push_back(std::move(m));
  }
  return t;
}

SplitKernel split_kernel(const ComplexTensor& kernels, std::size_t in_planes,
                         std::size_t out_planes) {
  if (kernels.size() != in_planes * out_planes)
    throw std::invalid_argument("split_kernel: plane count mismatch");
  SplitKernel k;
  k.in_planes = in_planes;
  k.out_planes = out_planes;
  k.a.reserve(kernels.size());
  k.b.reserve(kernels.size());
  for (const auto& p : kernels) {
    k.a.push_back(component(p, false));
    k.b.push_back(component(p, true));
  }
  return k;
}

SplitTensor sim_conv(const SplitTensor& h, const SplitKernel& w) {
  if (h.x.size() != h.y.size())
    throw std::invalid_argument("sim_conv: plane count mismatch in input");
  if (h.x.size() != w.in_planes)
    throw std::invalid_argument("sim_conv: input planes do not match kernel");
  require_real_planes(h.x, "sim_conv");
  require_real_planes(h.y, "sim_conv");
  require_real_planes(w.a, "sim_conv");
  require_real_planes(w.b, "sim_conv");

  SplitTensor out;
  out.x.reserve(w.out_planes);
  out.y.reserve(w.out_planes);
  const Complex one{1.0, 0.0};
  const Complex minus_one{-1.0, 0.0};
  for (std::size_t ko = 0; ko < w.out_planes; ++ko) {
    ComplexMatrix re, im;
    for (std::size_t ki = 0; ki < w.in_planes; ++ki) {
      const auto& a = w.a[ki * w.out_planes + ko];
      const auto& b = w.b[ki * w.out_planes + ko];
      ComplexMatrix xa = conv_valid(h.x[ki], a);
      ComplexMatrix yb = conv_valid(h.y[ki], b);
      ComplexMatrix xb = conv_valid(h.x[ki], b);
      ComplexMatrix ya = conv_valid(h.y[ki], a);
      ComplexMatrix re_part = axpy(minus_one, yb, xa);
      ComplexMatrix im_part = axpy(one, ya, xb);
      if (ki == 0) {
        re = std::move(re_part);
        im = std::move(im_part);
      } else {
        re = axpy(one, re_part, re);
        im = axpy(one, im_part, im);
      }
    }
    out.x.push_back(std::move(re));
    out.y.push_back(std::move(im));
  }
  return out;
}

SplitTensor sim_conv_same(const SplitTensor& h, const SplitKernel& w) {
  if (w.a.empty()) throw std::invalid_argument("sim_conv_same: empty kernel");
  const std::size_t d = w.a[0].rows();
  if (d % 2 == 0)
    throw std::invalid_argument("sim_conv_same: kernel size must be odd");
  const std::size_t m = (d - 1) / 2;
  SplitTensor padded;
  padded.x = pad_planes(h.x, m);
  padded.y = pad_planes(h.y, m);
  return sim_conv(padded, w);
}

SplitTensor residual_block_forward(const SplitTensor& s, const SplitKernel& k1,
                                   const SplitKernel& k2,
                                   const ActivationKind& kind) {
  ComplexTensor sc = split_decode(s);
  ComplexTensor a1;
  a1.reserve(sc.size());
  for (const auto& p : sc) a1.push_back(activation(kind, p));
  SplitTensor c1 = sim_conv_same(split_encode(a1), k1);
  ComplexTensor c1c = split_decode(c1);
  ComplexTensor a2;
  a2.reserve(c1c.size());
  for (const auto& p : c1c) a2.push_back(activation(kind, p));
  SplitTensor c2 = sim_conv_same(split_encode(a2), k2);
  ComplexTensor c2c = split_decode(c2);
  if (c2c.size() != sc.size())
    throw std::invalid_argument("residual_block_forward: plane count change");
  ComplexTensor out;
  out.reserve(sc.size());
  const Complex one{1.0, 0.0};
  for (std::size_t p = 0; p < sc.size(); ++p)
    out.push_back(axpy(one, c2c[p], sc[p]));
  return split_encode(out);
}

ComplexTensor same_conv(const ComplexTensor& input,
                        const ComplexTensor& kernels, std::size_t out_planes) {
  if (kernels.empty() || input.empty())
    throw std::invalid_argument("same_conv: empty operand");
  if (kernels.size() != input.size() * out_planes)
    throw std::invalid_argument("same_conv: plane count mismatch");
  const std::size_t d = kernels[0].rows();
  if (d != kernels[0].cols() || d % 2 == 0)
    throw std::invalid_argument("same_conv: kernel must be square and odd");
  const std::size_t m = (d - 1) / 2;
  ComplexTensor padded = pad_planes(input, m);
  const Complex one{1.0, 0.0};
  ComplexTensor out;
  out.reserve(out_planes);
  for (std::size_t ko = 0; ko < out_planes; ++ko) {
    ComplexMatrix v = conv_valid(padded[0], kernels[ko]);
    for (std::size_t ki = 1; ki < padded.size(); ++ki)
      v = axpy(one, conv_valid(padded[ki], kernels[ki * out_planes + ko]), v);
    out.push_back(std::move(v));
  }
  return out;
}

ResidualCache residual_forward_cached(const ComplexTensor& s,
                                      const ComplexTensor& r1,
                                      const ComplexTensor& r2,
                                      const ActivationKind& kind) {
  const std::size_t k = s.size();
  if (r1.size() != k * k || r2.size() != k * k)
    throw std::invalid_argument(
        "residual_forward_cached: block kernels must hold k * k planes");
  ResidualCache c;
  c.a1.reserve(k);
  for (const auto& p : s) c.a1.push_back(activation(kind, p));
  c.c1 = same_conv(c.a1, r1, k);
  c.a2.reserve(k);
  for (const auto& p : c.c1) c.a2.push_back(activation(kind, p));
  ComplexTensor c2 = same_conv(c.a2, r2, k);
  c.out.reserve(k);
  const Complex one{1.0, 0.0};
  for (std::size_t p = 0; p < k; ++p) c.out.push_back(axpy(one, c2[p], s[p]));
  return c;
}

}  // namespace cvnet
