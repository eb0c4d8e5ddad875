#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvnet/complex_matrix.hpp"

namespace cvnet {

struct Sample {
  ComplexMatrix m;
  std::uint8_t label = 0;
};

// In-memory dataset; every sample matrix has dims height x width. Values are
// computed in double precision; on-disk storage is float32.
struct Dataset {
  std::vector<Sample> samples;
  std::size_t height = 0;
  std::size_t width = 0;
  std::string name;

  std::size_t size() const { return samples.size(); }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Right-pads every sample with zero columns up to target_width. All samples
// must share one height and have width <= target_width.
Dataset pad_uniform(const std::vector<Sample>& raw, std::size_t target_width,
                    const std::string& name = "");

// Seeded shuffle, then the first floor(train_frac * n) indices train, the
// next floor(val_frac * n) validate, the rest test. Every requested
// partition must be non-empty.
SplitIndices split_holdout(std::size_t n, double train_frac,
                           std::uint64_t seed, double val_frac = 0.0);

// Seeded shuffle into k folds with sizes differing by at most one (the
// first n mod k folds get the extra element). Fold i is the test set of
// split i; val stays empty. k == n gives leave-one-out.
std::vector<SplitIndices> kfold_splits(std::size_t n, std::size_t k,
                                       std::uint64_t seed);

/// CVDS container, little-endian:
///   magic   "CVDS" (4 bytes)
///   version u16 = 1
///   reserved u16 = 0
///   count   u32
///   height  u32
///   width   u32
///   then per sample: label u8, then height * width interleaved pairs
///   (re f32, im f32) in row-major order.
/// Readers reject unknown versions, truncation, trailing bytes, empty sets,
/// and non-finite values.
void cvds_write(const Dataset& ds, const std::string& path);
Dataset cvds_read(const std::string& path);

// FNV-1a 64 over the payload bytes (per sample: label byte then the f32
// pairs exactly as stored on disk), so the in-memory and on-disk hashes of
// one dataset agree.
std::uint64_t dataset_content_hash(const Dataset& ds);

// Two-class synthetic Doppler-time set, per_class samples each, deterministic
// under seed. Class 0 is a full-duration oscillatory Doppler stripe with a
// slowly drifting center; class 1 is a near-DC linear-chirp burst covering at
// most half of the time axis. Complex Gaussian noise with per-component std
// noise_sigma * signal_amplitude is added, so noise_sigma is relative to the
// signal scale. Dims must be at least 8 x 8. Class 0 samples come first.
Dataset synth_gestures(std::size_t per_class, std::size_t h, std::size_t w,
                       double noise_sigma, std::uint64_t seed);

}  // namespace cvnet
