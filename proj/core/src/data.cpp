#include "cvnet/data.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cvnet/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "CVDS io assumes a little-endian host");

namespace cvnet {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

void require_uniform(const Dataset& ds, const char* who) {
  for (const auto& s : ds.samples)
    if (s.m.rows() != ds.height || s.m.cols() != ds.width)
      throw std::invalid_argument(std::string(who) +
                                  ": sample dims differ from dataset dims");
}

void require_finite(const Dataset& ds, const char* who) {
  for (const auto& s : ds.samples)
    for (const auto& z : s.m)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument(std::string(who) +
                                    ": non-finite sample value");
}

template <class T>
void put(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size())
    throw std::runtime_error("cvds_read: truncated file");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

// Payload bytes of one sample exactly as stored on disk.
void append_sample_payload(std::string& buf, const Sample& s) {
  put<std::uint8_t>(buf, s.label);
  for (std::size_t i = 1; i <= s.m.rows(); ++i)
    for (std::size_t j = 1; j <= s.m.cols(); ++j) {
      put<float>(buf, static_cast<float>(s.m(i, j).real()));
      put<float>(buf, static_cast<float>(s.m(i, j).imag()));
    }
}

}  // namespace

Dataset pad_uniform(const std::vector<Sample>& raw, std::size_t target_width,
                    const std::string& name) {
  if (raw.empty()) throw std::invalid_argument("pad_uniform: empty input");
  const std::size_t h = raw[0].m.rows();
  Dataset ds;
  ds.height = h;
  ds.width = target_width;
  ds.name = name;
  ds.samples.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.m.rows() != h)
      throw std::invalid_argument("pad_uniform: heights differ");
    if (r.m.cols() > target_width)
      throw std::invalid_argument("pad_uniform: sample wider than target");
    Sample s;
    s.label = r.label;
    s.m = ComplexMatrix(h, target_width);
    for (std::size_t i = 1; i <= h; ++i)
      for (std::size_t j = 1; j <= r.m.cols(); ++j) s.m(i, j) = r.m(i, j);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

SplitIndices split_holdout(std::size_t n, double train_frac,
                           std::uint64_t seed, double val_frac) {
  if (n == 0) throw std::invalid_argument("split_holdout: empty dataset");
  if (train_frac <= 0.0 || train_frac >= 1.0)
    throw std::invalid_argument("split_holdout: train_frac must be in (0,1)");
  if (val_frac < 0.0 || train_frac + val_frac >= 1.0)
    throw std::invalid_argument("split_holdout: fractions must leave a test set");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  const std::size_t n_train =
      static_cast<std::size_t>(train_frac * static_cast<double>(n));
  const std::size_t n_val =
      static_cast<std::size_t>(val_frac * static_cast<double>(n));
  if (n_train == 0 || n_train + n_val >= n ||
      (val_frac > 0.0 && n_val == 0))
    throw std::invalid_argument("split_holdout: a partition would be empty");
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

std::vector<SplitIndices> kfold_splits(std::size_t n, std::size_t k,
                                       std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_splits: k must be >= 2");
  if (k > n) throw std::invalid_argument("kfold_splits: k exceeds n");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  // First n mod k folds carry the extra element.
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t off = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t len = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(idx.begin() + off, idx.begin() + off + len);
    off += len;
  }
  std::vector<SplitIndices> out(k);
  for (std::size_t f = 0; f < k; ++f) {
    out[f].test = folds[f];
    for (std::size_t o = 0; o < k; ++o)
      if (o != f)
        out[f].train.insert(out[f].train.end(), folds[o].begin(),
                            folds[o].end());
  }
  return out;
}

void cvds_write(const Dataset& ds, const std::string& path) {
  if (ds.samples.empty())
    throw std::invalid_argument("cvds_write: empty dataset");
  if (ds.height == 0 || ds.width == 0)
    throw std::invalid_argument("cvds_write: zero dims");
  require_uniform(ds, "cvds_write");
  require_finite(ds, "cvds_write");
  if (ds.samples.size() > 0xFFFFFFFFULL || ds.height > 0xFFFFFFFFULL ||
      ds.width > 0xFFFFFFFFULL)
    throw std::invalid_argument("cvds_write: dimension overflow");

  std::string buf;
  buf.reserve(20 + ds.samples.size() * (1 + ds.height * ds.width * 8));
  buf.append(kMagic, 4);
  put<std::uint16_t>(buf, kVersion);
  put<std::uint16_t>(buf, 0);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.samples.size()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.height));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.width));
  for (const auto& s : ds.samples) append_sample_payload(buf, s);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cvds_write: cannot open " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("cvds_write: write failed for " + path);
}

Dataset cvds_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cvds_read: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  std::size_t off = 0;
  if (buf.size() < 20 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("cvds_read: bad magic in " + path);
  off = 4;
  const auto version = take<std::uint16_t>(buf, off);
  if (version != kVersion)
    throw std::runtime_error("cvds_read: unsupported version " +
                             std::to_string(version));
  (void)take<std::uint16_t>(buf, off);  // reserved
  const auto count = take<std::uint32_t>(buf, off);
  const auto height = take<std::uint32_t>(buf, off);
  const auto width = take<std::uint32_t>(buf, off);
  if (count == 0) throw std::runtime_error("cvds_read: empty dataset");
  if (height == 0 || width == 0)
    throw std::runtime_error("cvds_read: zero dims");
  const std::size_t expect =
      20 + static_cast<std::size_t>(count) *
               (1 + static_cast<std::size_t>(height) * width * 8);
  if (buf.size() != expect)
    throw std::runtime_error("cvds_read: file size mismatch in " + path);

  Dataset ds;
  ds.height = height;
  ds.width = width;
  ds.name = path;
  ds.samples.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    Sample smp;
    smp.label = take<std::uint8_t>(buf, off);
    smp.m = ComplexMatrix(height, width);
    for (std::size_t i = 1; i <= height; ++i)
      for (std::size_t j = 1; j <= width; ++j) {
        float re = take<float>(buf, off);
        float im = take<float>(buf, off);
        if (!std::isfinite(re) || !std::isfinite(im))
          throw std::runtime_error("cvds_read: non-finite value in " + path);
        smp.m(i, j) = {static_cast<double>(re), static_cast<double>(im)};
      }
    ds.samples.push_back(std::move(smp));
  }
  return ds;
}

std::uint64_t dataset_content_hash(const Dataset& ds) {
  require_uniform(ds, "dataset_content_hash");
  std::string payload;
  payload.reserve(ds.samples.size() * (1 + ds.height * ds.width * 8));
  for (const auto& s : ds.samples) append_sample_payload(payload, s);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// Signal amplitude; noise_sigma is expressed relative to it, so the
// separability bound on noise_sigma is scale-free.
constexpr double kAmplitude = 0.09;
// Stripe carrier: one third of a turn per time step. A 3-tap moving average
// nulls exactly this rate, so the two classes separate under short kernels
// by frequency content alone.
constexpr double kOmega = kTwoPi / 3.0;

// Adds a row-Gaussian envelope of one phasor at (center_row, col). Envelope
// width sigma_r keeps nearby center paths overlapping so magnitudes are a
// pure function of geometry.
void deposit(ComplexMatrix& m, double center_row, std::size_t col,
             double theta, double amp, double sigma_r = 2.0) {
  const Complex phasor{amp * std::cos(theta), amp * std::sin(theta)};
  for (std::size_t r = 1; r <= m.rows(); ++r) {
    double dr = (static_cast<double>(r) - center_row);
    double env = std::exp(-dr * dr / (2.0 * sigma_r * sigma_r));
    if (env < 1e-6) continue;
    m(r, col) += env * phasor;
  }
}

// Sustained return, full time axis: instantaneous frequency kOmega + dev(t)
// with dev a slow sinusoid (accumulated phase), center row wandering with
// the same deviation. Never dwells near DC.
ComplexMatrix synth_stripe(Rng& rng, std::size_t h, std::size_t w) {
  ComplexMatrix m(h, w);
  const double hd = static_cast<double>(h);
  const double wd = static_cast<double>(w);
  double r0 = rng.uniform(0.35 * hd, 0.65 * hd);
  double drift_depth = rng.uniform(0.1, 0.25);
  double drift_freq = rng.uniform(0.5, 1.5);
  double drift_phase = rng.uniform(0.0, kTwoPi);
  double row_gain = rng.uniform(6.0, 10.0);
  double theta = rng.uniform(0.0, kTwoPi);
  for (std::size_t t = 0; t < w; ++t) {
    double td = static_cast<double>(t);
    double dev =
        drift_depth * std::cos(kTwoPi * drift_freq * td / wd + drift_phase);
    double center = r0 + row_gain * dev;
    deposit(m, center, t + 1, theta, kAmplitude);
    theta += kOmega + dev;
  }
  return m;
}

// Short burst, one third to one half of the time axis: linear chirp whose
// instantaneous frequency sweeps between a near-DC band and about 1.2
// rad/step while the center row crosses the map diagonally. Sweep and row
// directions are randomized; a wider row footprint than the stripe keeps
// per-sample energy comparable despite the shorter dwell.
ComplexMatrix synth_burst(Rng& rng, std::size_t h, std::size_t w) {
  ComplexMatrix m(h, w);
  const double hd = static_cast<double>(h);
  std::size_t min_len = std::max<std::size_t>(6, w / 3);
  std::size_t max_len = std::max<std::size_t>(min_len + 1, w / 2);
  std::size_t len =
      min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
  std::size_t t0 = static_cast<std::size_t>(rng.below(w - len + 1));
  double r_start = rng.uniform(0.15 * hd, 0.45 * hd);
  double r_end = rng.uniform(0.55 * hd, 0.85 * hd);
  if (rng.uniform() < 0.5) std::swap(r_start, r_end);
  double w_lo = rng.uniform(0.0, 0.2);
  double w_hi = rng.uniform(1.0, 1.4);
  if (rng.uniform() < 0.5) std::swap(w_lo, w_hi);
  double theta = rng.uniform(0.0, kTwoPi);
  for (std::size_t tau = 0; tau < len; ++tau) {
    double frac =
        len > 1 ? static_cast<double>(tau) / static_cast<double>(len - 1) : 0.0;
    double center = r_start + (r_end - r_start) * frac;
    deposit(m, center, t0 + tau + 1, theta, kAmplitude, 3.0);
    theta += w_lo + (w_hi - w_lo) * frac;
  }
  return m;
}

}  // namespace

Dataset synth_gestures(std::size_t per_class, std::size_t h, std::size_t w,
                       double noise_sigma, std::uint64_t seed) {
  if (per_class == 0)
    throw std::invalid_argument("synth_gestures: per_class must be >= 1");
  if (h < 8 || w < 8)
    throw std::invalid_argument("synth_gestures: dims must be at least 8 x 8");
  if (noise_sigma < 0.0)
    throw std::invalid_argument("synth_gestures: negative noise_sigma");
  Rng rng(seed);
  Dataset ds;
  ds.height = h;
  ds.width = w;
  ds.name = "synth";
  ds.samples.reserve(2 * per_class);
  const double noise = noise_sigma * kAmplitude;
  for (std::size_t cls = 0; cls < 2; ++cls) {
    for (std::size_t n = 0; n < per_class; ++n) {
      Sample s;
      s.label = static_cast<std::uint8_t>(cls);
      s.m = cls == 0 ? synth_stripe(rng, h, w) : synth_burst(rng, h, w);
      if (noise > 0.0)
        for (auto& z : s.m)
          z += Complex{noise * rng.gaussian(), noise * rng.gaussian()};
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace cvnet
