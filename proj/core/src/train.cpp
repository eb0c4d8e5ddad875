#include "cvnet/train.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "cvnet/rng.hpp"
#include "cvnet/simcv.hpp"

namespace cvnet {

CReluDeriv resolve_crelu(const TrainConfig& cfg) {
  switch (cfg.crelu) {
    case CReluChoice::Joint:
      return CReluDeriv::Joint;
    case CReluChoice::Split:
      return CReluDeriv::Split;
    case CReluChoice::Auto:
      break;
  }
  // Split is the exact derivative for every variant and keeps the real slice
  // of FullCV identical to RVSplit; Joint stays selectable explicitly.
  return CReluDeriv::Split;
}

LayerShapes config_shapes(const TrainConfig& cfg, const Dataset& ds) {
  return LayerShapes::derive(ds.height, ds.width, cfg.d1, cfg.d2, cfg.k1,
                             cfg.k2, cfg.g);
}

namespace {

ConvLayerOut conv_forward_dispatch(Variant variant, const ComplexTensor& input,
                                   const ComplexTensor& kernels,
                                   const std::vector<Complex>& biases,
                                   const ActivationKind& kind) {
  const bool simulated = variant == Variant::CVForwardCNN ||
                         variant == Variant::CVForwardResidual;
  if (!simulated) return conv_layer_forward(input, kernels, biases, kind);
  const SplitTensor st = split_encode(input);
  const SplitKernel sk = split_kernel(kernels, input.size(), biases.size());
  ComplexTensor v = split_decode(sim_conv(st, sk));
  for (std::size_t ko = 0; ko < v.size(); ++ko)
    for (Complex& z : v[ko]) z += biases[ko];
  ComplexTensor o;
  o.reserve(v.size());
  for (const ComplexMatrix& plane : v) o.push_back(activation(kind, plane));
  return {std::move(v), std::move(o)};
}

void run_indexed(std::size_t n, std::size_t threads,
                 const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ForwardCache forward_sample(const NetworkParams& params,
                            const ComplexMatrix& sample,
                            const ActivationKind& conv_kind,
                            const ActivationKind& dense_kind) {
  const LayerShapes& s = params.shapes;
  if (sample.rows() != s.alpha || sample.cols() != s.beta)
    throw std::invalid_argument("forward_sample: sample dims do not match the network input shape");
  ForwardCache c;
  c.conv_kind = conv_kind;
  c.dense_kind = dense_kind;
  if (params.real_mode()) {
    ComplexMatrix re(sample.rows(), sample.cols());
    ComplexMatrix im(sample.rows(), sample.cols());
    for (std::size_t i = 1; i <= sample.rows(); ++i)
      for (std::size_t j = 1; j <= sample.cols(); ++j) {
        re(i, j) = Complex(sample(i, j).real(), 0.0);
        im(i, j) = Complex(sample(i, j).imag(), 0.0);
      }
    c.input = {std::move(re), std::move(im)};
  } else {
    c.input = {sample};
  }
  if (c.input.size() != params.input_planes)
    throw std::invalid_argument("forward_sample: input plane count mismatch");

  ConvLayerOut l1 =
      conv_forward_dispatch(params.variant, c.input, params.w1, params.b1, conv_kind);
  c.v1 = std::move(l1.v);
  c.o1 = std::move(l1.o);
  c.s1.reserve(c.o1.size());
  for (const ComplexMatrix& plane : c.o1)
    c.s1.push_back(avgpool_forward(plane, s.g));

  if (params.variant == Variant::CVForwardResidual)
    c.res = residual_forward_cached(c.s1, params.r1, params.r2, conv_kind);

  ConvLayerOut l2 = conv_forward_dispatch(params.variant, c.conv2_input(),
                                          params.w2, params.b2, conv_kind);
  c.v2 = std::move(l2.v);
  c.o2 = std::move(l2.o);
  c.s2.reserve(c.o2.size());
  for (const ComplexMatrix& plane : c.o2)
    c.s2.push_back(avgpool_forward(plane, s.g));

  c.f = flatten(c.s2);
  const DenseOut head = dense_forward(params.w3, c.f, params.b3, dense_kind);
  c.v3 = head.v3;
  c.yhat = head.yhat;
  return c;
}

int predict_class(Complex yhat) { return yhat.real() >= 0.5 ? 1 : 0; }

Complex label_to_target(std::uint8_t label) {
  if (label > 1)
    throw std::invalid_argument("label_to_target: binary labels must be 0 or 1");
  return Complex(label == 1 ? 1.0 : 0.0, 0.0);
}

EvalMetrics evaluate(const NetworkParams& params, const Dataset& ds,
                     const std::vector<std::size_t>& idx,
                     const ActivationKind& conv_kind) {
  if (idx.empty()) throw std::invalid_argument("evaluate: empty index set");
  double loss_sum = 0.0, mae_sum = 0.0;
  Complex mbe_sum{0.0, 0.0};
  std::size_t correct = 0;
  for (std::size_t i : idx) {
    const Sample& smp = ds.samples.at(i);
    const ForwardCache c = forward_sample(params, smp.m, conv_kind);
    const Complex y = label_to_target(smp.label);
    loss_sum += loss(y, c.yhat);
    mae_sum += std::abs(y - c.yhat);
    mbe_sum += y - c.yhat;
    if (predict_class(c.yhat) == static_cast<int>(smp.label)) ++correct;
  }
  const double n = static_cast<double>(idx.size());
  EvalMetrics m;
  m.loss = loss_sum / n;
  m.acc = static_cast<double>(correct) / n;
  m.mae = mae_sum / n;
  m.mbe = mbe_sum / n;
  return m;
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

}  // namespace

std::string metrics_to_csv(const std::vector<EpochMetrics>& rows,
                           bool stable_output) {
  std::string out =
      "epoch,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc,wall_ms\n";
  for (const EpochMetrics& r : rows) {
    append_number(out, r.epoch);
    out += ',';
    append_number(out, r.train_loss);
    out += ',';
    if (r.has_val) append_number(out, r.val_loss);
    out += ',';
    if (r.has_test) append_number(out, r.test_loss);
    out += ',';
    append_number(out, r.train_acc);
    out += ',';
    if (r.has_val) append_number(out, r.val_acc);
    out += ',';
    if (r.has_test) append_number(out, r.test_acc);
    out += ',';
    append_number(out, stable_output ? 0.0 : r.wall_ms);
    out += '\n';
  }
  return out;
}

EpochMetrics train_epoch(NetworkParams& params, Optimizer& opt,
                         const Dataset& ds, const SplitIndices& split,
                         const TrainConfig& cfg, std::size_t epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  if (split.train.empty())
    throw std::invalid_argument("train_epoch: empty train split");
  if (cfg.batch == 0)
    throw std::invalid_argument("train_epoch: batch size must be >= 1");
  const CReluDeriv cmode = resolve_crelu(cfg);

  std::vector<std::size_t> order = split.train;
  Rng rng(derive_seed(cfg.seed, epoch));
  rng.shuffle(order);

  for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
    const std::size_t bsize = std::min(cfg.batch, order.size() - start);
    std::vector<GradientSet> slots(bsize);
    run_indexed(bsize, cfg.threads, [&](std::size_t b) {
      const Sample& smp = ds.samples[order[start + b]];
      const ForwardCache c = forward_sample(params, smp.m, cfg.activation);
      slots[b] = backward_sample(params, c, label_to_target(smp.label),
                                 cfg.loss_mode, cmode);
    });
    GradientSet avg = std::move(slots[0]);
    for (std::size_t b = 1; b < bsize; ++b) accumulate(avg, slots[b]);
    scale(avg, 1.0 / static_cast<double>(bsize));
    if (!all_finite(avg))
      throw NumericalError("train_epoch: non-finite gradient");
    apply_weight_decay(params, avg, opt.lr, opt.lambda, bsize, opt.reg);
    if (params.real_mode()) zero_imag(avg);
    momentum_step(params, opt, avg);
  }

  EpochMetrics m;
  m.epoch = epoch;
  const EvalMetrics tr = evaluate(params, ds, split.train, cfg.activation);
  m.train_loss = tr.loss;
  m.train_acc = tr.acc;
  if (!split.val.empty()) {
    const EvalMetrics va = evaluate(params, ds, split.val, cfg.activation);
    m.val_loss = va.loss;
    m.val_acc = va.acc;
    m.has_val = true;
  }
  if (!split.test.empty()) {
    const EvalMetrics te = evaluate(params, ds, split.test, cfg.activation);
    m.test_loss = te.loss;
    m.test_acc = te.acc;
    m.has_test = true;
  }
  const auto t1 = std::chrono::steady_clock::now();
  m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return m;
}

bool early_stop(const std::vector<double>& val_losses, std::size_t patience) {
  if (patience == 0) return false;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (double v : val_losses) {
    if (v < best) {
      best = v;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return stale >= patience;
}

std::vector<EpochMetrics> train_run(
    NetworkParams& params, Optimizer& opt, const Dataset& ds,
    const SplitIndices& split, const TrainConfig& cfg,
    const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (cfg.patience > 0 && split.val.empty())
    throw std::invalid_argument("train_run: early stopping needs a validation split");
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (std::size_t i : *part)
      if (ds.samples.at(i).label > 1)
        throw std::invalid_argument("train_run: binary labels must be 0 or 1");

  std::vector<EpochMetrics> history;
  std::vector<double> val_hist;
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    EpochMetrics m = train_epoch(params, opt, ds, split, cfg, e);
    if (!std::isfinite(m.train_loss) || (m.has_val && !std::isfinite(m.val_loss)) ||
        (m.has_test && !std::isfinite(m.test_loss)))
      throw NumericalError("train_run: non-finite loss");
    history.push_back(m);
    if (on_epoch) on_epoch(m);
    if (m.has_val) val_hist.push_back(m.val_loss);
    if (early_stop(val_hist, cfg.patience)) break;
  }
  return history;
}

CrossValResult cross_validate(const Dataset& ds, const TrainConfig& cfg,
                              std::size_t k) {
  const std::vector<SplitIndices> splits = kfold_splits(ds.size(), k, cfg.seed);
  const LayerShapes shapes = config_shapes(cfg, ds);
  CrossValResult res;
  double loss_sum = 0.0, acc_sum = 0.0;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    TrainConfig fold_cfg = cfg;
    fold_cfg.patience = 0;
    if (fold_cfg.batch > splits[f].train.size()) {
      std::string warn = "fold ";
      append_number(warn, f + 1);
      warn += ": batch ";
      append_number(warn, fold_cfg.batch);
      warn += " clamped to train size ";
      append_number(warn, splits[f].train.size());
      res.warnings.push_back(std::move(warn));
      fold_cfg.batch = splits[f].train.size();
    }
    NetworkParams params =
        init_params(shapes, derive_seed(cfg.seed, 1000 + f), cfg.variant);
    Optimizer opt(params, cfg.lr, cfg.momentum, cfg.lambda, cfg.reg);
    train_run(params, opt, ds, splits[f], fold_cfg);
    const EvalMetrics ev = evaluate(params, ds, splits[f].test, cfg.activation);
    res.folds.push_back({f + 1, ev.loss, ev.acc});
    loss_sum += ev.loss;
    acc_sum += ev.acc;
  }
  res.mean_loss = loss_sum / static_cast<double>(splits.size());
  res.mean_acc = acc_sum / static_cast<double>(splits.size());
  return res;
}

ParamCount count_params(const NetworkParams& params) {
  ParamCount c;
  for_each_param(params, [&](const ParamCoord&, const Complex&) {
    ++c.complex_entries;
  });
  c.real_scalars = c.complex_entries * (params.real_mode() ? 1 : 2);
  return c;
}

std::size_t count_params_analytic(const LayerShapes& s) {
  return s.k1 * (s.d1 * s.d1 + 1) + s.k1 * s.k2 * s.d2 * s.d2 + s.k2 +
         (s.fc + 1);
}

namespace {

constexpr char kParamsMagic[4] = {'C', 'V', 'N', 'P'};
constexpr std::uint16_t kParamsVersion = 1;

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& off) {
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

std::uint8_t variant_code(Variant v) {
  switch (v) {
    case Variant::FullCV: return 0;
    case Variant::CVForwardCNN: return 1;
    case Variant::CVForwardResidual: return 2;
    case Variant::RVSplit: return 3;
  }
  throw std::invalid_argument("variant_code: unknown variant");
}

Variant variant_from_code(std::uint8_t c) {
  switch (c) {
    case 0: return Variant::FullCV;
    case 1: return Variant::CVForwardCNN;
    case 2: return Variant::CVForwardResidual;
    case 3: return Variant::RVSplit;
    default:
      throw std::runtime_error("load_params: unknown variant code");
  }
}

}  // namespace

void save_params(const NetworkParams& params, const std::string& path) {
  std::string out;
  out.append(kParamsMagic, 4);
  put<std::uint16_t>(out, kParamsVersion);
  put<std::uint16_t>(out, 0);
  put<std::uint8_t>(out, variant_code(params.variant));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(params.input_planes));
  put<std::uint16_t>(out, 0);
  const LayerShapes& s = params.shapes;
  for (std::size_t dim : {s.alpha, s.beta, s.d1, s.d2, s.k1, s.k2, s.g}) {
    if (dim > 0xFFFFFFFFull)
      throw std::invalid_argument("save_params: dimension exceeds u32");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  }
  for_each_param(params, [&](const ParamCoord&, const Complex& z) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  });
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("save_params: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("save_params: write failed for " + path);
}

NetworkParams load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_params: cannot open " + path);
  std::string in((std::istreambuf_iterator<char>(f)),
                 std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 4 + 2 + 2 + 1 + 1 + 2 + 7 * 4;
  if (in.size() < kHeader)
    throw std::runtime_error("load_params: truncated header in " + path);
  if (std::memcmp(in.data(), kParamsMagic, 4) != 0)
    throw std::runtime_error("load_params: bad magic in " + path);
  std::size_t off = 4;
  if (take<std::uint16_t>(in, off) != kParamsVersion)
    throw std::runtime_error("load_params: unsupported version in " + path);
  take<std::uint16_t>(in, off);
  const Variant variant = variant_from_code(take<std::uint8_t>(in, off));
  const std::uint8_t input_planes = take<std::uint8_t>(in, off);
  take<std::uint16_t>(in, off);
  const std::uint32_t alpha = take<std::uint32_t>(in, off);
  const std::uint32_t beta = take<std::uint32_t>(in, off);
  const std::uint32_t d1 = take<std::uint32_t>(in, off);
  const std::uint32_t d2 = take<std::uint32_t>(in, off);
  const std::uint32_t k1 = take<std::uint32_t>(in, off);
  const std::uint32_t k2 = take<std::uint32_t>(in, off);
  const std::uint32_t g = take<std::uint32_t>(in, off);

  const std::size_t expected_planes = variant == Variant::RVSplit ? 2 : 1;
  if (input_planes != expected_planes)
    throw std::runtime_error("load_params: input plane count does not match the variant");

  NetworkParams p = init_params(LayerShapes::derive(alpha, beta, d1, d2, k1, k2, g),
                                0, variant);
  std::size_t entries = 0;
  for_each_param(p, [&](const ParamCoord&, const Complex&) { ++entries; });
  const std::size_t expected = kHeader + entries * 16;
  if (in.size() != expected)
    throw std::runtime_error("load_params: file size does not match the header in " + path);

  NetworkParams& mut = p;
  for_each_param(mut, [&](const ParamCoord&, Complex& z) {
    const double re = take<double>(in, off);
    const double im = take<double>(in, off);
    if (!std::isfinite(re) || !std::isfinite(im))
      throw std::runtime_error("load_params: non-finite value in " + path);
    z = Complex(re, im);
  });
  return p;
}

}  // namespace cvnet
