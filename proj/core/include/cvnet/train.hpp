#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvnet/backprop.hpp"
#include "cvnet/data.hpp"
#include "cvnet/layers.hpp"
#include "cvnet/optim.hpp"

namespace cvnet {

// Thrown when training hits non-finite values; the CLI maps it to exit 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CReLU derivative selection: Auto resolves to Split (the exact derivative,
// and the one whose real slice matches RVSplit); Joint is the sign-agreement
// gate, selectable explicitly.
enum class CReluChoice { Auto, Joint, Split };

struct TrainConfig {
  Variant variant = Variant::FullCV;
  std::size_t d1 = 3, d2 = 3;
  std::size_t k1 = 2, k2 = 4;
  std::size_t g = 2;
  ActivationKind activation{Activation::CReLU, 0.01};
  LossGradMode loss_mode = LossGradMode::Signed;
  CReluChoice crelu = CReluChoice::Auto;
  double lr = 1e-3;
  double momentum = 0.9;
  double lambda = 0.0;
  Reg reg = Reg::None;
  std::size_t batch = 10;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  double val_frac = 0.0;
  std::size_t patience = 0;  // 0 disables early stopping
  std::size_t threads = 1;
};

CReluDeriv resolve_crelu(const TrainConfig& cfg);

// Shapes derived from the dataset dims and the architecture parameters.
LayerShapes config_shapes(const TrainConfig& cfg, const Dataset& ds);

// One forward pass. The input tensor is the sample itself for complex
// variants and the stacked re/im planes for RVSplit; CV-forward variants
// route their convolutions through the simulated split path. The dense head
// activation defaults to split sigmoid.
ForwardCache forward_sample(
    const NetworkParams& params, const ComplexMatrix& sample,
    const ActivationKind& conv_kind,
    const ActivationKind& dense_kind = {Activation::SplitSigmoid, 0.01});

// Class 1 iff Re(yhat) >= 0.5.
int predict_class(Complex yhat);
Complex label_to_target(std::uint8_t label);

struct EvalMetrics {
  double loss = 0.0;
  double acc = 0.0;
  double mae = 0.0;
  Complex mbe{0.0, 0.0};
};
EvalMetrics evaluate(const NetworkParams& params, const Dataset& ds,
                     const std::vector<std::size_t>& idx,
                     const ActivationKind& conv_kind);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0, val_loss = 0.0, test_loss = 0.0;
  double train_acc = 0.0, val_acc = 0.0, test_acc = 0.0;
  bool has_val = false, has_test = false;
  double wall_ms = 0.0;
};

// CSV with header epoch,train_loss,val_loss,test_loss,train_acc,val_acc,
// test_acc,wall_ms; '.' decimal separator, LF line endings, shortest
// round-trip float formatting. Absent splits leave their fields empty.
// stable_output writes wall_ms as 0 so reruns are byte-identical.
std::string metrics_to_csv(const std::vector<EpochMetrics>& rows,
                           bool stable_output = false);

// One epoch: seeded reshuffle (stream derived from seed and epoch number),
// mini-batches with the last partial batch included, averaged gradients,
// weight decay, optimizer step. RVSplit zeroes imaginary gradient parts
// before the step. Metrics are computed after the epoch; wall_ms covers the
// whole epoch including evaluation.
EpochMetrics train_epoch(NetworkParams& params, Optimizer& opt,
                         const Dataset& ds, const SplitIndices& split,
                         const TrainConfig& cfg, std::size_t epoch);

// Runs up to cfg.epochs epochs with optional early stopping on val loss.
// Throws NumericalError on non-finite losses or gradients.
std::vector<EpochMetrics> train_run(
    NetworkParams& params, Optimizer& opt, const Dataset& ds,
    const SplitIndices& split, const TrainConfig& cfg,
    const std::function<void(const EpochMetrics&)>& on_epoch = {});

// True when val loss has not improved its running minimum for `patience`
// consecutive epochs; patience 0 never stops.
bool early_stop(const std::vector<double>& val_losses, std::size_t patience);

struct FoldResult {
  std::size_t fold = 0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};
struct CrossValResult {
  std::vector<FoldResult> folds;
  double mean_loss = 0.0;
  double mean_acc = 0.0;
  std::vector<std::string> warnings;
};
// Trains one fresh seeded network per fold (stream derived from the config
// seed and the fold index); batch is clamped to the fold train size with a
// warning when it exceeds it.
CrossValResult cross_validate(const Dataset& ds, const TrainConfig& cfg,
                              std::size_t k);

struct ParamCount {
  std::size_t complex_entries = 0;
  std::size_t real_scalars = 0;
};
// Enumerates the actual parameter entries; real_scalars is one per entry in
// real mode and two otherwise.
ParamCount count_params(const NetworkParams& params);
// Closed form for the single-input-plane architecture:
//   k1 (d1^2 + 1) + k1 k2 d2^2 + k2 + (fc + 1).
std::size_t count_params_analytic(const LayerShapes& s);

/// Parameter snapshot container, little-endian:
///   magic "CVNP", version u16 = 1, reserved u16, variant u8,
///   input_planes u8, reserved u16, shapes as 7 x u32
///   (alpha beta d1 d2 k1 k2 g), then tensor payloads as raw f64 re/im
///   pairs in the fixed walk order (w1, b1, w2, b2, w3, b3, r1, r2).
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

}  // namespace cvnet
