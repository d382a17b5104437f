#ifndef WTCONV_TOYTRAIN_HPP
#define WTCONV_TOYTRAIN_HPP

// Desk-scale classification harness for comparing spatial mixers.
//
// Model: replicate the single input channel c times, apply the mixer (a
// WTConv layer; a plain depth-wise conv is the same layer with zero wavelet
// levels), take per-channel log energy log(eps + mean(y^2)) as features and
// feed them to a linear two-class head trained with softmax cross-entropy.
// The mixer itself stays linear; the energy readout is the only nonlinearity.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wtconv/grad.hpp"
#include "wtconv/io.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv {

enum class FreqTask {
  Separable,       // smooth Gaussian blobs vs period <= 4 px textures
  LongWavelength,  // sinusoidal gratings, wavelength 32 px vs 16 px
};

struct FreqDatasetSpec {
  FreqTask task = FreqTask::Separable;
  std::int64_t count = 512;  // images, even; labels alternate 0, 1, 0, ...
  std::int64_t size = 64;    // square extent in pixels
  double noise = 0.0;        // additive uniform noise in [-noise, noise]
  std::uint64_t seed = 1;
};

template <typename Scalar>
struct FreqDataset {
  Tensor4<Scalar> images;  // (count, 1, size, size), values in [-1, 1]
  std::vector<int> labels;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
};

namespace detail {

inline std::uint64_t image_seed(std::uint64_t seed, std::int64_t i) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(i + 1) * 0xBF58476D1CE4E5B9ull;
}

/// Fills one size x size plane. Signal peak is at most 1 - noise, so the
/// noisy pixel stays within [-1, 1].
inline void render_image(const FreqDatasetSpec& spec, int label, UniformStream& rng,
                         double* out) {
  const std::int64_t n = spec.size;
  const double room = 1.0 - spec.noise;
  const double amplitude = room * rng.next(0.5, 1.0);
  std::vector<double> sig(n * n, 0.0);

  if (spec.task == FreqTask::LongWavelength) {
    const double wavelength = label == 0 ? 32.0 : 16.0;
    const double theta = rng.next(0.0, std::numbers::pi);
    const double phase = rng.next(0.0, 2.0 * std::numbers::pi);
    const double kx = std::cos(theta) * 2.0 * std::numbers::pi / wavelength;
    const double ky = std::sin(theta) * 2.0 * std::numbers::pi / wavelength;
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x)
        sig[y * n + x] = amplitude * std::sin(kx * x + ky * y + phase);
  } else if (label == 0) {
    const int blobs = 1 + static_cast<int>(rng.next() * 3.0);
    for (int b = 0; b < blobs; ++b) {
      const double cy = rng.next(0.0, n), cx = rng.next(0.0, n);
      const double sigma = rng.next(n / 8.0, n / 4.0);
      const double a = (rng.next() < 0.5 ? -1.0 : 1.0) * rng.next(0.5, 1.0);
      for (std::int64_t y = 0; y < n; ++y)
        for (std::int64_t x = 0; x < n; ++x) {
          const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
          sig[y * n + x] += a * std::exp(-r2 / (2.0 * sigma * sigma));
        }
    }
    double peak = 0.0;
    for (double v : sig) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
      for (double& v : sig) v *= amplitude / peak;
  } else {
    // Square-wave textures: checkerboard or stripes with period 2 or 4.
    const int kind = static_cast<int>(rng.next() * 3.0);  // 0 checker, 1 vertical, 2 horizontal
    const int period = rng.next() < 0.5 ? 2 : 4;
    const int oy = static_cast<int>(rng.next() * period), ox = static_cast<int>(rng.next() * period);
    auto wave = [&](std::int64_t t) { return ((t % period) < period / 2) ? 1.0 : -1.0; };
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x) {
        double v = 0.0;
        if (kind == 0) v = wave(y + oy) * wave(x + ox);
        else if (kind == 1) v = wave(x + ox);
        else v = wave(y + oy);
        sig[y * n + x] = amplitude * v;
      }
  }

  for (std::int64_t i = 0; i < n * n; ++i) {
    double v = sig[i];
    if (spec.noise > 0.0) v += rng.next(-spec.noise, spec.noise);
    out[i] = std::clamp(v, -1.0, 1.0);
  }
}

}  // namespace detail

/// Deterministic per seed; image i depends only on (seed, i).
template <typename Scalar>
FreqDataset<Scalar> generate_dataset(const FreqDatasetSpec& spec) {
  if (spec.count < 1) throw ParamError("generate_dataset: image count must be >= 1");
  if (spec.count % 2 != 0) throw ParamError("generate_dataset: image count must be even");
  if (spec.size < 2) throw ParamError("generate_dataset: image size must be >= 2");
  if (!(spec.noise >= 0.0 && spec.noise < 1.0))
    throw ParamError("generate_dataset: noise amplitude must be in [0, 1)");

  FreqDataset<Scalar> ds;
  ds.images = Tensor4<Scalar>(spec.count, 1, spec.size, spec.size);
  ds.labels.resize(spec.count);
  std::vector<double> plane(spec.size * spec.size);
  for (std::int64_t i = 0; i < spec.count; ++i) {
    ds.labels[i] = static_cast<int>(i % 2);
    UniformStream rng(detail::image_seed(spec.seed, i));
    detail::render_image(spec, ds.labels[i], rng, plane.data());
    Scalar* dst = ds.images.plane(i, 0);
    for (std::size_t j = 0; j < plane.size(); ++j) dst[j] = static_cast<Scalar>(plane[j]);
  }
  return ds;
}

enum class MixerKind { Plain, WTConv };

template <typename Scalar>
struct ToyModel {
  WTConvParams<Scalar> mixer;
  HeadBlock<Scalar> head;  // 2 x c weights, 2 offsets

  std::int64_t channels() const { return mixer.c; }
};

/// Plain mixers are WTConv layers with zero levels; everything downstream is
/// shared. The head starts at zero.
template <typename Scalar>
ToyModel<Scalar> make_toy_model(MixerKind kind, std::int64_t c, std::int64_t k, int levels,
                                std::uint64_t seed) {
  ToyModel<Scalar> m;
  m.mixer = init_params<Scalar>(c, k, kind == MixerKind::Plain ? 0 : levels, seed);
  m.head.weights.setZero(2, c);
  m.head.offsets.setZero(2);
  return m;
}

struct TrainConfig {
  int epochs = 30;
  double lr = 0.05;
  std::int64_t batch = 32;
  std::uint64_t seed = 1;  // minibatch order
};

struct EpochStats {
  int epoch = 0;  // 0 = before training
  double loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

template <typename Scalar>
struct TrainResult {
  ToyModel<Scalar> model;
  std::vector<EpochStats> log;
};

/// Raised when the loss stops being finite; carries the last finite state.
template <typename Scalar>
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, TrainResult<Scalar> last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const TrainResult<Scalar>& last_finite() const { return last_; }

 private:
  TrainResult<Scalar> last_;
};

namespace detail {

inline constexpr double kEnergyEps = 1e-6;

template <typename Scalar>
Tensor4<Scalar> lift_batch(const FreqDataset<Scalar>& ds, const std::vector<std::int64_t>& idx,
                           std::int64_t c) {
  const std::int64_t h = ds.images.h(), w = ds.images.w();
  Tensor4<Scalar> x(static_cast<std::int64_t>(idx.size()), c, h, w);
  for (std::size_t b = 0; b < idx.size(); ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      std::copy_n(ds.images.plane(idx[b], 0), h * w, x.plane(b, ch));
  return x;
}

template <typename Scalar>
struct BatchEval {
  double loss = 0.0;  // summed over the batch
  std::int64_t correct = 0;
};

inline constexpr std::int64_t kChunk = 4;  // images per forward pass; keeps tensors in cache

template <typename Scalar>
void accumulate(WTConvGrads<Scalar>& acc, const WTConvGrads<Scalar>& g) {
  acc.d_w0.values() += g.d_w0.values();
  acc.d_scale0.values() += g.d_scale0.values();
  for (std::size_t i = 0; i < g.d_w_levels.size(); ++i) {
    acc.d_w_levels[i].values() += g.d_w_levels[i].values();
    acc.d_scale_levels[i].values() += g.d_scale_levels[i].values();
  }
}

/// Forward (and optionally backward) over one batch, in chunks of kChunk
/// images. Gradients are of the mean loss over the whole batch.
template <typename Scalar>
BatchEval<Scalar> run_batch(const ToyModel<Scalar>& m, const FreqDataset<Scalar>& ds,
                            const std::vector<std::int64_t>& batch,
                            WTConvGrads<Scalar>* mixer_grad, HeadBlock<Scalar>* head_grad) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const std::int64_t c = m.channels(), total = static_cast<std::int64_t>(batch.size());
  BatchEval<Scalar> r;
  if (mixer_grad) {
    head_grad->weights.setZero(2, c);
    head_grad->offsets.setZero(2);
  }

  for (std::int64_t start = 0; start < total; start += kChunk) {
    const std::vector<std::int64_t> idx(batch.begin() + start,
                                        batch.begin() + std::min(total, start + kChunk));
    const std::int64_t bsz = static_cast<std::int64_t>(idx.size());
    const Tensor4<Scalar> x = lift_batch(ds, idx, c);
    WTConvTrace<Scalar> trace;
    const Tensor4<Scalar> y = wtconv_forward(x, m.mixer, mixer_grad ? &trace : nullptr);
    const std::int64_t plane = y.h() * y.w();

    Mat energy(c, bsz), feat(c, bsz);
    for (std::int64_t b = 0; b < bsz; ++b)
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const Scalar* p = y.plane(b, ch);
        Scalar acc = 0;
        for (std::int64_t i = 0; i < plane; ++i) acc += p[i] * p[i];
        energy(ch, b) = acc / static_cast<Scalar>(plane) + Scalar(kEnergyEps);
        feat(ch, b) = std::log(energy(ch, b));
      }
    Mat logits = m.head.weights * feat;
    logits.colwise() += m.head.offsets;

    Mat dlogits(2, bsz);
    for (std::int64_t b = 0; b < bsz; ++b) {
      const int label = ds.labels[idx[b]];
      const Scalar mx = logits.col(b).maxCoeff();
      const Scalar z0 = std::exp(logits(0, b) - mx), z1 = std::exp(logits(1, b) - mx);
      const Scalar lse = mx + std::log(z0 + z1);
      r.loss += static_cast<double>(lse - logits(label, b));
      const int pred = logits(1, b) > logits(0, b) ? 1 : 0;
      r.correct += pred == label;
      dlogits(0, b) = z0 / (z0 + z1) - (label == 0);
      dlogits(1, b) = z1 / (z0 + z1) - (label == 1);
    }
    if (!mixer_grad) continue;

    dlogits /= static_cast<Scalar>(total);
    head_grad->weights += dlogits * feat.transpose();
    head_grad->offsets += dlogits.rowwise().sum();
    const Mat dfeat = m.head.weights.transpose() * dlogits;

    Tensor4<Scalar> dy(y.shape());
    for (std::int64_t b = 0; b < bsz; ++b)
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const Scalar g = dfeat(ch, b) * Scalar(2) / (static_cast<Scalar>(plane) * energy(ch, b));
        const Scalar* p = y.plane(b, ch);
        Scalar* d = dy.plane(b, ch);
        for (std::int64_t i = 0; i < plane; ++i) d[i] = g * p[i];
      }
    WTConvGrads<Scalar> g = wtconv_backward(x, m.mixer, dy, &trace);
    if (start == 0)
      *mixer_grad = std::move(g);
    else
      accumulate(*mixer_grad, g);
  }
  return r;
}

template <typename Scalar>
BatchEval<Scalar> evaluate(const ToyModel<Scalar>& m, const FreqDataset<Scalar>& ds,
                           std::int64_t chunk) {
  BatchEval<Scalar> total;
  for (std::int64_t start = 0; start < ds.size(); start += chunk) {
    std::vector<std::int64_t> idx;
    for (std::int64_t i = start; i < std::min(ds.size(), start + chunk); ++i) idx.push_back(i);
    const BatchEval<Scalar> r = run_batch<Scalar>(m, ds, idx, nullptr, nullptr);
    total.loss += r.loss;
    total.correct += r.correct;
  }
  return total;
}

}  // namespace detail

/// Mean loss and accuracy of a model on a dataset.
template <typename Scalar>
EpochStats evaluate_model(const ToyModel<Scalar>& m, const FreqDataset<Scalar>& ds) {
  const auto r = detail::evaluate(m, ds, 64);
  EpochStats s;
  s.loss = r.loss / static_cast<double>(ds.size());
  s.train_acc = static_cast<double>(r.correct) / static_cast<double>(ds.size());
  return s;
}

template <typename Scalar>
bool params_finite(const ToyModel<Scalar>& m) {
  const WTConvParams<Scalar>& p = m.mixer;
  bool ok = p.w0.values().allFinite() && p.scale0.values().allFinite() &&
            m.head.weights.allFinite() && m.head.offsets.allFinite();
  for (int i = 0; ok && i < p.levels; ++i)
    ok = p.w_levels[i].values().allFinite() && p.scale_levels[i].values().allFinite();
  return ok;
}

/// Minibatch SGD. log[0] describes the untrained model; log[e] is measured on
/// the full train and test sets after epoch e.
template <typename Scalar>
TrainResult<Scalar> train(ToyModel<Scalar> model, const FreqDataset<Scalar>& train_set,
                          const FreqDataset<Scalar>& test_set, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ParamError("train: epoch count must be >= 0");
  if (cfg.batch < 1) throw ParamError("train: batch size must be >= 1");
  if (!std::isfinite(cfg.lr)) throw ParamError("train: learning rate must be finite");
  if (train_set.size() < 1 || test_set.size() < 1)
    throw ParamError("train: datasets must be non-empty");
  if (train_set.images.shape().h != test_set.images.shape().h ||
      train_set.images.shape().w != test_set.images.shape().w)
    throw ShapeError("train: train and test images differ in extent");

  const Scalar lr = static_cast<Scalar>(cfg.lr);
  auto measure = [&](int epoch) {
    EpochStats tr = evaluate_model(model, train_set);
    EpochStats te = evaluate_model(model, test_set);
    return EpochStats{epoch, tr.loss, tr.train_acc, te.train_acc};
  };

  TrainResult<Scalar> result{model, {measure(0)}};
  UniformStream order_rng(cfg.seed);
  std::vector<std::int64_t> order(train_set.size());
  for (std::int64_t i = 0; i < train_set.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with the documented stream; std::shuffle is not portable.
    for (std::int64_t i = train_set.size() - 1; i > 0; --i)
      std::swap(order[i], order[order_rng.next_bits() % static_cast<std::uint64_t>(i + 1)]);

    for (std::int64_t start = 0; start < train_set.size(); start += cfg.batch) {
      std::vector<std::int64_t> idx(order.begin() + start,
                                    order.begin() + std::min(train_set.size(), start + cfg.batch));
      WTConvGrads<Scalar> mg;
      HeadBlock<Scalar> hg;
      detail::run_batch<Scalar>(model, train_set, idx, &mg, &hg);
      model.mixer = sgd_step(model.mixer, mg, lr);
      model.head.weights -= lr * hg.weights;
      model.head.offsets -= lr * hg.offsets;
      if (!params_finite(model))
        throw TrainingError<Scalar>("training diverged at epoch " + std::to_string(epoch),
                                    result);
    }

    EpochStats stats = measure(epoch);
    if (!std::isfinite(stats.loss))
      throw TrainingError<Scalar>("training diverged at epoch " + std::to_string(epoch),
                                  result);
    result.model = model;
    result.log.push_back(stats);
  }
  return result;
}

/// CSV with header "epoch,loss,train_acc,test_acc".
std::string training_log_csv(const std::vector<EpochStats>& log);

}  // namespace wtconv

#endif  // WTCONV_TOYTRAIN_HPP
