// wtconv: command-line front end.
//
// Exit codes: 0 success, 1 suite/assertion failure, 2 usage or config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wtconv/analysis.hpp"
#include "wtconv/checks.hpp"
#include "wtconv/config.hpp"
#include "wtconv/ingest.hpp"
#include "wtconv/io.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/runtime.hpp"
#include "wtconv/toytrain.hpp"

namespace fs = std::filesystem;
using namespace wtconv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// Config helpers

const std::set<std::string> kInitChoices = {"uniform-fan-in", "zeros", "identity"};
const std::set<std::string> kPrecisionChoices = {"f32", "f64"};

InitScheme parse_init(const std::string& s) {
  if (s == "zeros") return InitScheme::Zeros;
  if (s == "identity") return InitScheme::Identity;
  return InitScheme::UniformFanIn;
}

void require_readable(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is required");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " '" + path + "' does not exist");
}

void require_writable(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is required");
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent))
    throw ConfigError(what + " '" + path + "': directory '" + parent.string() + "' does not exist");
  if (fs::is_directory(path)) throw ConfigError(what + " '" + path + "' is a directory");
}

struct LayerSettings {
  std::int64_t channels = 1, kernel = 5;
  int levels = 1;
  std::uint64_t seed = 1;
  InitScheme init = InitScheme::UniformFanIn;
  std::string params_path;  // load instead of initializing when set
};

const std::set<std::string> kLayerKeys = {"channels", "kernel", "levels", "seed", "init", "params"};

LayerSettings read_layer(const RunConfig& cfg) {
  LayerSettings s;
  s.channels = cfg.get_int("layer", "channels", s.channels);
  s.kernel = cfg.get_int("layer", "kernel", s.kernel);
  s.levels = static_cast<int>(cfg.get_int("layer", "levels", s.levels));
  s.seed = cfg.get_seed("layer", "seed", s.seed);
  s.init = parse_init(cfg.get_choice("layer", "init", kInitChoices, "uniform-fan-in"));
  s.params_path = cfg.get_string("layer", "params", "");
  if (s.params_path.empty()) {
    if (s.channels < 1) throw ConfigError("[layer] channels must be >= 1");
    if (s.kernel < 1 || s.kernel % 2 == 0) throw ConfigError("[layer] kernel must be odd and >= 1");
    if (s.levels < 0 || s.levels > 16) throw ConfigError("[layer] levels must be in 0..16");
  } else {
    require_readable(s.params_path, "[layer] params");
  }
  return s;
}

template <typename Scalar>
WTConvParams<Scalar> build_layer(const LayerSettings& s) {
  if (!s.params_path.empty()) return load_params<Scalar>(s.params_path).params;
  return init_params<Scalar>(s.channels, s.kernel, s.levels, s.seed, s.init);
}

void write_text(const std::string& path, const std::string& text) {
  detail::write_file(path, text);
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const std::string& suite, bool inject_fault) {
  CheckOptions opts{suite, inject_fault};
  if (!suite.empty()) {
    bool known = false;
    for (const auto& n : check_suite_names())
      known = known || n == suite || n.substr(0, n.find('.')) == suite;
    if (!known) {
      std::cerr << "error: unknown suite '" << suite << "'\n";
      return kExitUsage;
    }
  }
  const auto results = run_checks(opts);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-26s %s  %s\n", r.suite.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    all = all && r.passed;
  }
  std::printf("%zu suites, %s\n", results.size(), all ? "all passed" : "FAILURES");
  return all ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// flops

int cmd_flops(std::int64_t c, std::int64_t k, std::int64_t n, int levels, std::int64_t stride) {
  if (levels > 0 && stride != 1) {
    std::cerr << "error: the wavelet layer is stride-1 only; use --levels 0 for strided convs\n";
    return kExitUsage;
  }
  auto line = [](const char* label, std::int64_t v) {
    std::printf("%-18s %14lld  (~%s)\n", label, static_cast<long long>(v), human_flops(v).c_str());
  };
  std::printf("input              %lld x %lld x %lld\n", static_cast<long long>(c),
              static_cast<long long>(n), static_cast<long long>(n));
  std::printf("kernel             %lld x %lld, levels %d, stride %lld\n", static_cast<long long>(k),
              static_cast<long long>(k), levels, static_cast<long long>(stride));
  std::printf("receptive field    %lld x %lld\n", static_cast<long long>(receptive_field(k, levels)),
              static_cast<long long>(receptive_field(k, levels)));
  if (levels == 0) {
    line("conv", flops_depthwise(c, k, k, n, n, stride, stride));
    line("total", flops_depthwise(c, k, k, n, n, stride, stride));
    return kExitOk;
  }
  const FlopReport r = flop_report(c, k, n, n, levels);
  line("base conv", r.base_flops);
  for (std::size_t i = 0; i < r.per_level.size(); ++i) {
    const std::string label = "level " + std::to_string(i + 1) + " conv";
    line(label.c_str(), r.per_level[i]);
  }
  line("conv total", r.conv_flops);
  line("wt", r.wt_flops);
  line("iwt", r.iwt_flops);
  line("wt+iwt", r.wt_flops + r.iwt_flops);
  line("total", r.total);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// forward

const ConfigSchema kForwardSchema = {
    {"layer", kLayerKeys},
    {"run", {"precision"}},
    {"output", {"tensor", "params"}},
};

template <typename Scalar>
void run_forward(const LayerSettings& ls, const std::string& input, const std::string& output,
                 const std::string& params_out) {
  const WTConvParams<Scalar> p = build_layer<Scalar>(ls);
  const Tensor4<Scalar> x = read_tensor<Scalar>(input);
  if (x.c() != p.c)
    throw ConfigError("input has " + std::to_string(x.c()) + " channels, layer expects " +
                      std::to_string(p.c));
  const std::int64_t m = std::int64_t{1} << p.levels;
  const std::int64_t ph = round_up_to_multiple(x.h(), m), pw = round_up_to_multiple(x.w(), m);
  const Tensor4<Scalar> y = crop(wtconv_forward(reflect_pad(x, ph, pw), p), x.h(), x.w());
  write_tensor(output, y);
  if (!params_out.empty()) save_params(params_out, p);

  std::printf("shape            %s", y.shape().str().c_str());
  if (ph != x.h() || pw != x.w())
    std::printf("  (padded to %lldx%lld for the transform)", static_cast<long long>(ph),
                static_cast<long long>(pw));
  std::printf("\nreceptive field  %lld x %lld\n", static_cast<long long>(receptive_field(p)),
              static_cast<long long>(receptive_field(p)));
  const ParamBreakdown b = param_breakdown(p);
  std::printf("parameters       %lld (base kernel %lld, level kernels %lld, scales %lld)\n",
              static_cast<long long>(b.total), static_cast<long long>(b.base_kernel),
              static_cast<long long>(b.level_kernels),
              static_cast<long long>(b.base_scale + b.level_scales));
  std::printf("wrote            %s\n", output.c_str());
}

int cmd_forward(const std::string& config_path, const std::string& input,
                const std::string& output_flag) {
  const RunConfig cfg = RunConfig::load(config_path);
  cfg.validate(kForwardSchema);
  const LayerSettings ls = read_layer(cfg);
  const std::string precision = cfg.get_choice("run", "precision", kPrecisionChoices, "f64");
  const std::string output = output_flag.empty() ? cfg.get_string("output", "tensor", "") : output_flag;
  const std::string params_out = cfg.get_string("output", "params", "");
  require_readable(input, "input tensor");
  if (tensor_file_width(input) == 0) throw ConfigError("input must end in .f32t or .f64t");
  require_writable(output, "output tensor");
  if (tensor_file_width(output) != (precision == "f32" ? 4 : 8))
    throw ConfigError("output tensor must end in ." + precision + "t for precision " + precision);
  if (!params_out.empty()) require_writable(params_out, "[output] params");

  if (precision == "f32")
    run_forward<float>(ls, input, output, params_out);
  else
    run_forward<double>(ls, input, output, params_out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// erf

const ConfigSchema kErfSchema = {
    {"layer", kLayerKeys},
    {"probe", {"size", "images", "kind", "seed", "depth"}},
    {"run", {"precision"}},
    {"output", {"csv", "pgm"}},
};

template <typename Scalar>
ErfMap run_erf(const LayerSettings& ls, std::int64_t size, std::int64_t images,
               const std::string& kind, std::uint64_t seed, int depth) {
  const WTConvParams<Scalar> p = build_layer<Scalar>(ls);
  std::vector<WTConvParams<Scalar>> stack(depth, p);
  std::vector<Tensor4<Scalar>> probes;
  for (std::int64_t i = 0; i < images; ++i) {
    if (kind == "constant")
      probes.emplace_back(1, p.c, size, size, Scalar(1));
    else
      probes.push_back(random_uniform<Scalar>(1, p.c, size, size, Scalar(-1), Scalar(1), seed + i));
  }
  return erf_map(stack, probes);
}

int cmd_erf(const std::string& config_path) {
  const RunConfig cfg = RunConfig::load(config_path);
  cfg.validate(kErfSchema);
  const LayerSettings ls = read_layer(cfg);
  const std::int64_t size = cfg.get_int("probe", "size", 128);
  const std::int64_t images = cfg.get_int("probe", "images", 4);
  const std::string kind = cfg.get_choice("probe", "kind", {"random", "constant"}, "random");
  const std::uint64_t seed = cfg.get_seed("probe", "seed", 1);
  const std::int64_t depth = cfg.get_int("probe", "depth", 1);
  const std::string precision = cfg.get_choice("run", "precision", kPrecisionChoices, "f64");
  const std::string csv = cfg.get_string("output", "csv", "");
  const std::string pgm = cfg.get_string("output", "pgm", "");
  if (size < 1) throw ConfigError("[probe] size must be >= 1");
  if (images < 1) throw ConfigError("[probe] images must be >= 1");
  if (depth < 1 || depth > 8) throw ConfigError("[probe] depth must be in 1..8");
  if (csv.empty() && pgm.empty()) throw ConfigError("[output] needs csv and/or pgm");
  if (!csv.empty()) require_writable(csv, "[output] csv");
  if (!pgm.empty()) require_writable(pgm, "[output] pgm");

  const ErfMap map = precision == "f32"
                         ? run_erf<float>(ls, size, images, kind, seed, static_cast<int>(depth))
                         : run_erf<double>(ls, size, images, kind, seed, static_cast<int>(depth));
  if (!csv.empty()) write_text(csv, erf_to_csv(map));
  if (!pgm.empty()) write_text(pgm, erf_to_pgm(map));
  const SupportBox box = support_box(map);
  std::printf("probe            %lld x %lld, %lld image(s), depth %lld\n", static_cast<long long>(size),
              static_cast<long long>(size), static_cast<long long>(images),
              static_cast<long long>(depth));
  std::printf("support box      rows %lld..%lld, cols %lld..%lld (%lld x %lld)\n",
              static_cast<long long>(box.y0), static_cast<long long>(box.y1),
              static_cast<long long>(box.x0), static_cast<long long>(box.x1),
              static_cast<long long>(box.height()), static_cast<long long>(box.width()));
  std::printf("support pixels   %lld\n", static_cast<long long>(support_size(map)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

const ConfigSchema kTrainSchema = {
    {"model", {"mixer", "channels", "kernel", "levels", "seed"}},
    {"data", {"task", "train", "test", "size", "noise", "seed"}},
    {"train", {"epochs", "lr", "batch", "seed"}},
    {"run", {"precision"}},
    {"output", {"log", "checkpoint"}},
};

template <typename Scalar>
int run_train(const RunConfig& cfg, const std::string& log_path, const std::string& ckpt_path) {
  const MixerKind kind = cfg.get_choice("model", "mixer", {"wtconv", "plain"}, "wtconv") == "plain"
                             ? MixerKind::Plain
                             : MixerKind::WTConv;
  const std::int64_t c = cfg.get_int("model", "channels", 4);
  const std::int64_t k = cfg.get_int("model", "kernel", 3);
  const int levels = static_cast<int>(cfg.get_int("model", "levels", 2));
  const std::uint64_t model_seed = cfg.get_seed("model", "seed", 1);

  FreqDatasetSpec spec;
  spec.task = cfg.get_choice("data", "task", {"separable", "long-wavelength"}, "separable") ==
                      "long-wavelength"
                  ? FreqTask::LongWavelength
                  : FreqTask::Separable;
  spec.size = cfg.get_int("data", "size", 64);
  spec.noise = cfg.get_double("data", "noise", 0.0);
  spec.seed = cfg.get_seed("data", "seed", 1);
  const std::int64_t n_train = cfg.get_int("data", "train", 512);
  const std::int64_t n_test = cfg.get_int("data", "test", 256);

  TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_int("train", "epochs", 30));
  tc.lr = cfg.get_double("train", "lr", 0.05);
  tc.batch = cfg.get_int("train", "batch", 32);
  tc.seed = cfg.get_seed("train", "seed", 1);

  if (c < 1 || k < 1 || k % 2 == 0 || levels < 0) throw ConfigError("invalid [model] settings");
  if (kind == MixerKind::WTConv && spec.size % (std::int64_t{1} << levels) != 0)
    throw ConfigError("[data] size must be divisible by 2^levels");

  FreqDatasetSpec train_spec = spec, test_spec = spec;
  train_spec.count = n_train;
  test_spec.count = n_test;
  test_spec.seed = spec.seed + 1;
  const auto train_set = generate_dataset<Scalar>(train_spec);
  const auto test_set = generate_dataset<Scalar>(test_spec);
  auto model = make_toy_model<Scalar>(kind, c, k, levels, model_seed);

  int status = kExitOk;
  TrainResult<Scalar> result;
  try {
    result = train(model, train_set, test_set, tc);
  } catch (const TrainingError<Scalar>& e) {
    std::cerr << "error: " << e.what() << "; writing the last finite state\n";
    result = e.last_finite();
    status = kExitFailure;
  }
  write_text(log_path, training_log_csv(result.log));
  if (!ckpt_path.empty()) save_params(ckpt_path, result.model.mixer, &result.model.head);
  const EpochStats& last = result.log.back();
  std::printf("mixer            %s (c=%lld, k=%lld, levels=%d)\n",
              kind == MixerKind::Plain ? "plain" : "wtconv", static_cast<long long>(c),
              static_cast<long long>(k), result.model.mixer.levels);
  std::printf("epochs           %d\nfinal loss       %.6f\ntrain accuracy   %.4f\ntest accuracy    %.4f\n",
              last.epoch, last.loss, last.train_acc, last.test_acc);
  return status;
}

int cmd_train(const std::string& config_path) {
  const RunConfig cfg = RunConfig::load(config_path);
  cfg.validate(kTrainSchema);
  const std::string precision = cfg.get_choice("run", "precision", kPrecisionChoices, "f64");
  const std::string log_path = cfg.get_string("output", "log", "");
  const std::string ckpt = cfg.get_string("output", "checkpoint", "");
  require_writable(log_path, "[output] log");
  if (!ckpt.empty()) require_writable(ckpt, "[output] checkpoint");
  return precision == "f32" ? run_train<float>(cfg, log_path, ckpt)
                            : run_train<double>(cfg, log_path, ckpt);
}

// ---------------------------------------------------------------------------
// info

int cmd_info() {
  std::printf(
      "wtconv 1.0\n"
      "layout        batch, channel, height, width (row-major)\n"
      "convolution   cross-correlation, zero padding, stride-1 layer\n"
      "wavelet       orthonormal 2D Haar, subband order LL, LH, HL, HH\n"
      "prng          std::mt19937_64, u = (bits >> 11) * 2^-53\n"
      "tensor files  .f32t / .f64t: u32 n,c,h,w + raw little-endian values\n"
      "param files   'WTCV' v1 header, w0, level kernels, scale0, level scales [+ 'HEAD']\n"
      "suites       ");
  for (const auto& n : check_suite_names()) std::printf(" %s", n.c_str());
  std::printf("\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  retain_heap_buffers();
  CLI::App app{"WTConv: depth-wise convolution in a cascaded Haar wavelet domain"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Run the built-in property suites");
  std::string suite;
  bool inject_fault = false;
  check->add_option("--suite", suite, "Only run this group (wavelet, conv, wtconv, grad, flops) or suite");
  check->add_flag("--inject-fault", inject_fault)->group("");

  auto* flops = app.add_subcommand("flops", "Print the FLOP cost model for one layer");
  std::int64_t fc = 1, fk = 5, fn = 512, fstride = 1;
  int flevels = 3;
  flops->add_option("-c,--channels", fc, "Input channels")->check(CLI::PositiveNumber);
  flops->add_option("-k,--kernel", fk, "Kernel extent")->check(CLI::PositiveNumber);
  flops->add_option("-n,--size", fn, "Square input extent")->check(CLI::PositiveNumber);
  flops->add_option("-l,--levels", flevels, "Wavelet levels")->check(CLI::NonNegativeNumber);
  flops->add_option("-s,--stride", fstride, "Stride (levels 0 only)")->check(CLI::PositiveNumber);

  auto* forward = app.add_subcommand("forward", "Run one layer on a tensor dump");
  std::string fwd_config, fwd_input, fwd_output;
  forward->add_option("config", fwd_config, "Config file")->required();
  forward->add_option("-i,--input", fwd_input, "Input tensor (.f32t/.f64t)")->required();
  forward->add_option("-o,--output", fwd_output, "Output tensor; overrides [output] tensor");

  auto* erf = app.add_subcommand("erf", "Effective receptive field map");
  std::string erf_config;
  erf->add_option("config", erf_config, "Config file")->required();

  auto* trainc = app.add_subcommand("train", "Toy frequency-discrimination training");
  std::string train_config;
  trainc->add_option("config", train_config, "Config file")->required();

  app.add_subcommand("info", "Describe conventions and formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(suite, inject_fault);
    if (flops->parsed()) return cmd_flops(fc, fk, fn, flevels, fstride);
    if (forward->parsed()) return cmd_forward(fwd_config, fwd_input, fwd_output);
    if (erf->parsed()) return cmd_erf(erf_config);
    if (trainc->parsed()) return cmd_train(train_config);
    return cmd_info();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {  // ShapeError, ParamError
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
