// cvnet: data synthesis/conversion, training, evaluation, verification, and
// variant comparison for the complex-valued CNN library.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 numerical failure. Machine-readable output goes to stdout or files as
// CSV; human diagnostics go to stderr.
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvnet/data.hpp"
#include "cvnet/train.hpp"
#include "cvnet/verify.hpp"

namespace {

using nlohmann::json;
using namespace cvnet;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::map<std::string, Variant> kVariantNames = {
    {"full-cv", Variant::FullCV},
    {"cv-forward", Variant::CVForwardCNN},
    {"cv-residual", Variant::CVForwardResidual},
    {"rv-split", Variant::RVSplit},
};

const std::map<std::string, Activation> kActivationNames = {
    {"crelu", Activation::CReLU},
    {"zrelu", Activation::ZReLU},
    {"split-sigmoid", Activation::SplitSigmoid},
    {"split-tanh", Activation::SplitTanh},
    {"real-relu", Activation::RealReLU},
    {"leaky-relu", Activation::LeakyReLU},
    {"prelu", Activation::ParametricReLU},
    {"elu", Activation::ELU},
};

const std::map<std::string, LossGradMode> kLossNames = {
    {"signed", LossGradMode::Signed},
    {"abs", LossGradMode::Abs},
};

const std::map<std::string, CReluChoice> kCReluNames = {
    {"auto", CReluChoice::Auto},
    {"joint", CReluChoice::Joint},
    {"split", CReluChoice::Split},
};

const std::map<std::string, Reg> kRegNames = {
    {"none", Reg::None},
    {"l1", Reg::L1},
    {"l2", Reg::L2},
};

template <class T>
std::string name_of(const std::map<std::string, T>& names, T v) {
  for (const auto& [k, val] : names)
    if (val == v) return k;
  return "?";
}

// Training options shared by `train` and `compare`; flags mirror TrainConfig.
struct TrainOpts {
  std::string data;
  TrainConfig cfg;
  bool stable_output = false;
  std::string out_csv;
  std::string out_params;
  std::string manifest = "cvnet_manifest.json";
};

void add_train_flags(CLI::App* cmd, TrainOpts& o, bool with_variant) {
  cmd->add_option("--data", o.data, "Input CVDS dataset")->required();
  if (with_variant)
    cmd->add_option("--variant", o.cfg.variant, "Network variant")
        ->transform(CLI::CheckedTransformer(kVariantNames, CLI::ignore_case))
        ->default_str("full-cv");
  auto* kernel = cmd->add_option_function<std::size_t>(
      "--kernel",
      [&o](const std::size_t& d) { o.cfg.d1 = o.cfg.d2 = d; },
      "Kernel size for both conv layers (default 3)");
  cmd->add_option("--d1", o.cfg.d1, "Conv1 kernel size")
      ->excludes(kernel)
      ->capture_default_str();
  cmd->add_option("--d2", o.cfg.d2, "Conv2 kernel size")
      ->excludes(kernel)
      ->capture_default_str();
  cmd->add_option("--k1", o.cfg.k1, "Conv1 plane count")->capture_default_str();
  cmd->add_option("--k2", o.cfg.k2, "Conv2 plane count")->capture_default_str();
  cmd->add_option("--pool", o.cfg.g, "Pooling window and stride")
      ->capture_default_str();
  cmd->add_option("--activation", o.cfg.activation.fn, "Conv activation")
      ->transform(CLI::CheckedTransformer(kActivationNames, CLI::ignore_case))
      ->default_str("crelu");
  cmd->add_option("--act-alpha", o.cfg.activation.alpha,
                  "Activation slope parameter (leaky-relu, prelu, elu)")
      ->capture_default_str();
  cmd->add_option("--loss", o.cfg.loss_mode, "Loss gradient mode")
      ->transform(CLI::CheckedTransformer(kLossNames, CLI::ignore_case))
      ->default_str("signed");
  cmd->add_option("--crelu-deriv", o.cfg.crelu, "CReLU derivative mode")
      ->transform(CLI::CheckedTransformer(kCReluNames, CLI::ignore_case))
      ->default_str("auto");
  cmd->add_option("--lr", o.cfg.lr, "Learning rate")->capture_default_str();
  cmd->add_option("--momentum", o.cfg.momentum, "Classical momentum")
      ->capture_default_str();
  cmd->add_option("--lambda", o.cfg.lambda, "Weight decay strength")
      ->capture_default_str();
  cmd->add_option("--reg", o.cfg.reg, "Weight decay kind")
      ->transform(CLI::CheckedTransformer(kRegNames, CLI::ignore_case))
      ->default_str("none");
  cmd->add_option("--batch", o.cfg.batch, "Mini-batch size")
      ->capture_default_str();
  cmd->add_option("--epochs", o.cfg.epochs, "Epoch count")
      ->capture_default_str();
  cmd->add_option("--seed", o.cfg.seed, "Run seed (shuffle, split, init)")
      ->capture_default_str();
  cmd->add_option("--train-frac", o.cfg.train_frac, "Training fraction")
      ->capture_default_str();
  cmd->add_option("--val-frac", o.cfg.val_frac, "Validation fraction")
      ->capture_default_str();
  cmd->add_option("--patience", o.cfg.patience,
                  "Early-stopping patience (0 disables)")
      ->capture_default_str();
  cmd->add_option("--threads", o.cfg.threads, "Worker thread cap")
      ->envname("CVNET_THREADS")
      ->capture_default_str();
  cmd->add_flag("--stable-output", o.stable_output,
                "Write wall_ms as 0 so reruns are byte-identical");
  cmd->add_option("--out-csv", o.out_csv,
                  "Metrics CSV path (default: stdout)");
  cmd->add_option("--manifest", o.manifest, "Run manifest path")
      ->capture_default_str();
}

json config_json(const TrainConfig& c) {
  return json{{"variant", name_of(kVariantNames, c.variant)},
              {"d1", c.d1},
              {"d2", c.d2},
              {"k1", c.k1},
              {"k2", c.k2},
              {"pool", c.g},
              {"activation", name_of(kActivationNames, c.activation.fn)},
              {"act_alpha", c.activation.alpha},
              {"loss", name_of(kLossNames, c.loss_mode)},
              {"crelu_deriv", name_of(kCReluNames, c.crelu)},
              {"lr", c.lr},
              {"momentum", c.momentum},
              {"lambda", c.lambda},
              {"reg", name_of(kRegNames, c.reg)},
              {"batch", c.batch},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"train_frac", c.train_frac},
              {"val_frac", c.val_frac},
              {"patience", c.patience},
              {"threads", c.threads}};
}

json dataset_json(const Dataset& ds, const std::string& path) {
  return json{{"path", path},
              {"count", ds.size()},
              {"height", ds.height},
              {"width", ds.width},
              {"content_hash", hash_hex(dataset_content_hash(ds))}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

void write_manifest(const std::string& path, json& m) {
  write_text(path, m.dump(2) + "\n");
}

void emit_csv(const std::string& out_csv, const std::string& csv) {
  if (out_csv.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_text(out_csv, csv);
}

int epochs_to_95(const std::vector<EpochMetrics>& hist) {
  for (const auto& m : hist)
    if (m.has_test && m.test_acc >= 0.95) return static_cast<int>(m.epoch);
  return -1;
}

// Per-epoch stderr progress line.
void progress(const std::string& tag, const EpochMetrics& m,
              std::size_t total) {
  std::fprintf(stderr, "%s epoch %zu/%zu train_loss %.6f", tag.c_str(),
               m.epoch, total, m.train_loss);
  if (m.has_val) std::fprintf(stderr, " val_acc %.3f", m.val_acc);
  if (m.has_test) std::fprintf(stderr, " test_acc %.3f", m.test_acc);
  std::fputc('\n', stderr);
}

// ---- synth ----------------------------------------------------------------

struct SynthOpts {
  std::size_t classes = 2;
  std::size_t per_class = 100;
  std::size_t height = 32;
  std::size_t width = 24;
  double noise = 0.05;
  std::uint64_t seed = 7;
  std::string out;
};

int run_synth(const SynthOpts& o) {
  if (o.classes != 2)
    throw std::invalid_argument("synth: exactly 2 classes are supported");
  Dataset ds = synth_gestures(o.per_class, o.height, o.width, o.noise, o.seed);
  cvds_write(ds, o.out);
  std::fprintf(stderr,
               "wrote %s: %zu samples %zux%zu noise %g seed %llu hash %s\n",
               o.out.c_str(), ds.size(), ds.height, ds.width, o.noise,
               static_cast<unsigned long long>(o.seed),
               hash_hex(dataset_content_hash(ds)).c_str());
  return kExitOk;
}

// ---- convert --------------------------------------------------------------

struct ConvertOpts {
  std::string in;
  std::string out;
  std::size_t pad_width = 0;
  bool info = false;
};

int run_convert(const ConvertOpts& o) {
  Dataset ds = cvds_read(o.in);
  if (o.info) {
    std::size_t c0 = 0, c1 = 0;
    for (const auto& s : ds.samples) (s.label == 0 ? c0 : c1)++;
    std::fputs("count,height,width,class0,class1,content_hash\n", stdout);
    std::fprintf(stdout, "%zu,%zu,%zu,%zu,%zu,%s\n", ds.size(), ds.height,
                 ds.width, c0, c1,
                 hash_hex(dataset_content_hash(ds)).c_str());
  }
  if (!o.out.empty()) {
    if (o.pad_width != 0)
      ds = pad_uniform(ds.samples, o.pad_width, ds.name);
    cvds_write(ds, o.out);
    std::fprintf(stderr, "wrote %s: %zu samples %zux%zu\n", o.out.c_str(),
                 ds.size(), ds.height, ds.width);
  }
  if (!o.info && o.out.empty())
    throw std::invalid_argument("convert: pass --info, --out, or both");
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

int run_train(TrainOpts& o) {
  Dataset ds = cvds_read(o.data);
  const SplitIndices split =
      split_holdout(ds.size(), o.cfg.train_frac, o.cfg.seed, o.cfg.val_frac);

  json manifest{{"command", "train"},
                {"library_version", CVNET_VERSION},
                {"started_utc", utc_now()},
                {"finished_utc", nullptr},
                {"seed", o.cfg.seed},
                {"config", config_json(o.cfg)},
                {"dataset", dataset_json(ds, o.data)}};
  write_manifest(o.manifest, manifest);

  NetworkParams params =
      init_params(config_shapes(o.cfg, ds), o.cfg.seed, o.cfg.variant);
  Optimizer opt(params, o.cfg.lr, o.cfg.momentum, o.cfg.lambda, o.cfg.reg);
  std::vector<EpochMetrics> hist = train_run(
      params, opt, ds, split, o.cfg,
      [&](const EpochMetrics& m) { progress("train", m, o.cfg.epochs); });

  emit_csv(o.out_csv, metrics_to_csv(hist, o.stable_output));
  if (!o.out_params.empty()) save_params(params, o.out_params);
  manifest["finished_utc"] = utc_now();
  write_manifest(o.manifest, manifest);
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalOpts {
  std::string data;
  std::string params;
  ActivationKind activation{Activation::CReLU, 0.01};
};

int run_eval(const EvalOpts& o) {
  Dataset ds = cvds_read(o.data);
  NetworkParams p = load_params(o.params);
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const EvalMetrics m = evaluate(p, ds, idx, o.activation);
  std::fputs("loss,acc,mae,mbe_re,mbe_im\n", stdout);
  std::fprintf(stdout, "%.17g,%.17g,%.17g,%.17g,%.17g\n", m.loss, m.acc, m.mae,
               m.mbe.real(), m.mbe.imag());
  std::fprintf(stderr, "%s on %s: loss %.6f acc %.3f over %zu samples\n",
               o.params.c_str(), o.data.c_str(), m.loss, m.acc, ds.size());
  return kExitOk;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckOpts {
  std::size_t height = 8, width = 8;
  std::size_t d1 = 2, d2 = 2, k1 = 2, k2 = 2, g = 2;
  Variant variant = Variant::FullCV;
  ActivationKind activation{Activation::SplitSigmoid, 0.01};
  CReluDeriv crelu = CReluDeriv::Split;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  double h = 1e-5;
  double threshold = 1e-4;
};

int run_gradcheck(const GradcheckOpts& o) {
  const LayerShapes shapes =
      LayerShapes::derive(o.height, o.width, o.d1, o.d2, o.k1, o.k2, o.g);
  const bool gated = o.activation.fn == Activation::CReLU ||
                     o.activation.fn == Activation::ZReLU;
  if (gated)
    std::fprintf(stderr,
                 "gradcheck: %s has gate boundaries; components within 1e-3 "
                 "of a boundary are reported in the note and may exceed the "
                 "threshold\n",
                 activation_name(o.activation).c_str());
  std::fprintf(stdout, "# fd_gradcheck h=%g threshold=%g activation=%s variant=%s seeds=%zu\n",
               o.h, o.threshold, activation_name(o.activation).c_str(),
               name_of(kVariantNames, o.variant).c_str(), o.seeds);
  bool all_pass = true;
  for (std::size_t s = 0; s < o.seeds; ++s) {
    const std::uint64_t seed = o.seed + s;
    const GradCheckReport rep = fd_gradcheck(shapes, o.variant, o.activation,
                                             o.crelu, seed, o.h, o.threshold);
    // to_csv carries its own header; keep it only for the first block.
    const std::string block = rep.to_csv();
    std::fputs(s == 0 ? block.c_str()
                      : block.c_str() + block.find('\n') + 1,
               stdout);
    std::fprintf(stderr, "gradcheck seed %llu: max_rel_err %.3g %s%s%s\n",
                 static_cast<unsigned long long>(seed), rep.max_rel_err,
                 rep.pass ? "PASS" : "FAIL", rep.note.empty() ? "" : " note: ",
                 rep.note.c_str());
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? kExitOk : kExitVerifyFail;
}

// ---- sim-equiv ------------------------------------------------------------

struct SimEquivOpts {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-12;
};

int run_sim_equiv(const SimEquivOpts& o) {
  const SimEquivReport r = sim_equiv_check(o.trials, o.seed, o.tol);
  std::fputs("trials,max_diff,tol,pass\n", stdout);
  std::fprintf(stdout, "%zu,%.17g,%.17g,%d\n", r.trials, r.max_diff, r.tol,
               r.pass ? 1 : 0);
  std::fprintf(stderr, "sim-equiv: %zu trials max_diff %.3g %s\n", r.trials,
               r.max_diff, r.pass ? "PASS" : "FAIL");
  return r.pass ? kExitOk : kExitVerifyFail;
}

// ---- cr-check -------------------------------------------------------------

struct CrCheckOpts {
  std::size_t points = 100;
  double h = 1e-5;
  double tol = 1e-5;
  std::uint64_t seed = 1;
};

int run_cr_check(const CrCheckOpts& o) {
  const std::vector<Complex> pts = cr_random_points(o.points, o.seed);
  struct Case {
    const char* name;
    Complex (*fn)(Complex);
    bool expect_pass;
  };
  const Case cases[] = {
      {"z^2", [](Complex z) { return z * z; }, true},
      {"exp(z)", [](Complex z) { return std::exp(z); }, true},
      {"conj(z)", [](Complex z) { return std::conj(z); }, false},
      {"|z|^2", [](Complex z) { return Complex(std::norm(z), 0.0); }, false},
  };
  std::fputs("name,points,max_residual,tol,pass,expected\n", stdout);
  bool ok = true;
  for (const Case& c : cases) {
    const CRReport r =
        cauchy_riemann_check(c.fn, c.name, pts, o.h, o.tol);
    std::fprintf(stdout, "%s,%zu,%.17g,%.17g,%d,%d\n", r.name.c_str(),
                 r.points, r.max_residual, r.tol, r.pass ? 1 : 0,
                 c.expect_pass ? 1 : 0);
    if (r.pass != c.expect_pass) {
      ok = false;
      std::fprintf(stderr, "cr-check: %s expected %s but got %s\n", c.name,
                   c.expect_pass ? "pass" : "fail", r.pass ? "pass" : "fail");
    }
  }
  std::fprintf(stderr, "cr-check: %s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitVerifyFail;
}

// ---- compare --------------------------------------------------------------

int run_compare(TrainOpts& o, bool with_residual) {
  Dataset ds = cvds_read(o.data);
  const SplitIndices split =
      split_holdout(ds.size(), o.cfg.train_frac, o.cfg.seed, o.cfg.val_frac);

  std::vector<Variant> variants = {Variant::FullCV, Variant::CVForwardCNN,
                                   Variant::RVSplit};
  if (with_residual) variants.push_back(Variant::CVForwardResidual);

  json names = json::array();
  for (Variant v : variants) names.push_back(name_of(kVariantNames, v));
  json manifest{{"command", "compare"},
                {"library_version", CVNET_VERSION},
                {"started_utc", utc_now()},
                {"finished_utc", nullptr},
                {"seed", o.cfg.seed},
                {"config", config_json(o.cfg)},
                {"dataset", dataset_json(ds, o.data)},
                {"variants", names}};
  write_manifest(o.manifest, manifest);

  std::string csv =
      "variant,epoch,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc,"
      "wall_ms\n";
  json reached;
  std::string summary = "variant,epochs_to_95\n";
  for (Variant v : variants) {
    TrainConfig cfg = o.cfg;
    cfg.variant = v;
    const std::string tag = name_of(kVariantNames, v);
    NetworkParams params = init_params(config_shapes(cfg, ds), cfg.seed, v);
    Optimizer opt(params, cfg.lr, cfg.momentum, cfg.lambda, cfg.reg);
    std::vector<EpochMetrics> hist = train_run(
        params, opt, ds, split, cfg,
        [&](const EpochMetrics& m) { progress(tag, m, cfg.epochs); });
    // Reuse the canonical formatter, then prefix the variant column.
    const std::string block = metrics_to_csv(hist, o.stable_output);
    std::size_t pos = block.find('\n') + 1;
    while (pos < block.size()) {
      const std::size_t end = block.find('\n', pos);
      csv += tag + ',' + block.substr(pos, end - pos + 1);
      pos = end + 1;
    }
    const int e95 = epochs_to_95(hist);
    reached[tag] = e95;
    summary += tag + ',' + std::to_string(e95) + '\n';
    std::fprintf(stderr, "%s: epochs_to_95 %d final_test_acc %.3f\n",
                 tag.c_str(), e95,
                 hist.empty() ? 0.0 : hist.back().test_acc);
  }

  emit_csv(o.out_csv, csv);
  // The per-variant convergence summary is machine output too; it shares
  // stdout only when the epoch table went to a file.
  if (!o.out_csv.empty()) std::fputs(summary.c_str(), stdout);
  manifest["epochs_to_95"] = reached;
  manifest["finished_utc"] = utc_now();
  write_manifest(o.manifest, manifest);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"complex-valued CNN toolkit"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic CVDS dataset");
  synth->add_option("--classes", synth_opts.classes, "Class count (must be 2)")
      ->capture_default_str();
  synth->add_option("--per-class", synth_opts.per_class, "Samples per class")
      ->capture_default_str();
  synth->add_option("--height", synth_opts.height, "Sample rows")
      ->capture_default_str();
  synth->add_option("--width", synth_opts.width, "Sample cols")
      ->capture_default_str();
  synth->add_option("--noise", synth_opts.noise, "Noise std relative to signal amplitude")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Generator seed")
      ->capture_default_str();
  synth->add_option("--out", synth_opts.out, "Output CVDS path")->required();
  synth->set_config("--config", "", "Config file (key=value lines)");

  ConvertOpts convert_opts;
  CLI::App* convert = app.add_subcommand("convert", "Inspect or rewrite a CVDS dataset");
  convert->add_option("--in", convert_opts.in, "Input CVDS path")->required();
  convert->add_option("--out", convert_opts.out, "Output CVDS path");
  convert->add_option("--pad-width", convert_opts.pad_width,
                      "Zero-pad every sample on the right to this width");
  convert->add_flag("--info", convert_opts.info, "Print a dataset summary CSV");
  convert->set_config("--config", "", "Config file (key=value lines)");

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "Train one variant on a CVDS dataset");
  add_train_flags(train, train_opts, true);
  train->add_option("--out-params", train_opts.out_params,
                    "Final parameter snapshot path");
  train->set_config("--config", "", "Config file (key=value lines)");

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate saved parameters on a CVDS dataset");
  eval->add_option("--data", eval_opts.data, "Input CVDS dataset")->required();
  eval->add_option("--params", eval_opts.params, "Parameter snapshot")->required();
  eval->add_option("--activation", eval_opts.activation.fn,
                   "Conv activation used at training time")
      ->transform(CLI::CheckedTransformer(kActivationNames, CLI::ignore_case))
      ->default_str("crelu");
  eval->add_option("--act-alpha", eval_opts.activation.alpha,
                   "Activation slope parameter")
      ->capture_default_str();
  eval->set_config("--config", "", "Config file (key=value lines)");

  GradcheckOpts gc_opts;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of the analytic gradients");
  // --h is the step flag here, so help keeps only its long form.
  gradcheck->set_help_flag("--help", "Print this help message and exit");
  gradcheck->add_option("--height", gc_opts.height, "Probe input rows")
      ->capture_default_str();
  gradcheck->add_option("--width", gc_opts.width, "Probe input cols")
      ->capture_default_str();
  gradcheck->add_option("--d1", gc_opts.d1, "Conv1 kernel size")
      ->capture_default_str();
  gradcheck->add_option("--d2", gc_opts.d2, "Conv2 kernel size")
      ->capture_default_str();
  gradcheck->add_option("--k1", gc_opts.k1, "Conv1 plane count")
      ->capture_default_str();
  gradcheck->add_option("--k2", gc_opts.k2, "Conv2 plane count")
      ->capture_default_str();
  gradcheck->add_option("--pool", gc_opts.g, "Pooling window")
      ->capture_default_str();
  gradcheck->add_option("--variant", gc_opts.variant, "Network variant")
      ->transform(CLI::CheckedTransformer(kVariantNames, CLI::ignore_case))
      ->default_str("full-cv");
  gradcheck->add_option("--activation", gc_opts.activation.fn, "Conv activation")
      ->transform(CLI::CheckedTransformer(kActivationNames, CLI::ignore_case))
      ->default_str("split-sigmoid");
  gradcheck->add_option("--act-alpha", gc_opts.activation.alpha,
                        "Activation slope parameter")
      ->capture_default_str();
  gradcheck
      ->add_option("--crelu-deriv", gc_opts.crelu,
                   "CReLU derivative under test")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, CReluDeriv>{{"joint", CReluDeriv::Joint},
                                            {"split", CReluDeriv::Split}},
          CLI::ignore_case))
      ->default_str("split");
  gradcheck->add_option("--seed", gc_opts.seed, "First seed")
      ->capture_default_str();
  gradcheck->add_option("--seeds", gc_opts.seeds, "Consecutive seed count")
      ->capture_default_str();
  gradcheck->add_option("--h", gc_opts.h, "Central-difference step")
      ->capture_default_str();
  gradcheck->add_option("--threshold", gc_opts.threshold,
                        "Relative-error pass threshold")
      ->capture_default_str();
  gradcheck->set_config("--config", "", "Config file (key=value lines)");

  SimEquivOpts se_opts;
  CLI::App* sim_equiv = app.add_subcommand(
      "sim-equiv", "Simulated-vs-direct complex convolution equivalence");
  sim_equiv->add_option("--trials", se_opts.trials, "Random trial count")
      ->capture_default_str();
  sim_equiv->add_option("--seed", se_opts.seed, "Trial stream seed")
      ->capture_default_str();
  sim_equiv->add_option("--tol", se_opts.tol, "Relative tolerance")
      ->capture_default_str();
  sim_equiv->set_config("--config", "", "Config file (key=value lines)");

  CrCheckOpts cr_opts;
  CLI::App* cr_check = app.add_subcommand(
      "cr-check", "Cauchy-Riemann battery: z^2 and exp pass, conj and |z|^2 fail");
  cr_check->set_help_flag("--help", "Print this help message and exit");
  cr_check->add_option("--points", cr_opts.points, "Random probe points")
      ->capture_default_str();
  cr_check->add_option("--h", cr_opts.h, "Central-difference step")
      ->capture_default_str();
  cr_check->add_option("--tol", cr_opts.tol, "Residual tolerance")
      ->capture_default_str();
  cr_check->add_option("--seed", cr_opts.seed, "Point stream seed")
      ->capture_default_str();
  cr_check->set_config("--config", "", "Config file (key=value lines)");

  TrainOpts compare_opts;
  bool with_residual = false;
  CLI::App* compare = app.add_subcommand(
      "compare", "Train full-cv, cv-forward, and rv-split under one config");
  add_train_flags(compare, compare_opts, false);
  compare->add_flag("--with-residual", with_residual,
                    "Also train the residual variant");
  compare->set_config("--config", "", "Config file (key=value lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(synth_opts);
    if (convert->parsed()) return run_convert(convert_opts);
    if (train->parsed()) return run_train(train_opts);
    if (eval->parsed()) return run_eval(eval_opts);
    if (gradcheck->parsed()) return run_gradcheck(gc_opts);
    if (sim_equiv->parsed()) return run_sim_equiv(se_opts);
    if (cr_check->parsed()) return run_cr_check(cr_opts);
    if (compare->parsed()) return run_compare(compare_opts, with_residual);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
