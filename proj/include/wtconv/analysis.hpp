#ifndef WTCONV_ANALYSIS_HPP
#define WTCONV_ANALYSIS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wtconv/grad.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv {

// ---------------------------------------------------------------------------
// Cost model. One FLOP is one kernel-tap product per output element.

/// C * K_W * K_H * N_W * N_H / (S_W * S_H). Strides must divide the extents.
std::int64_t flops_depthwise(std::int64_t c, std::int64_t k_w, std::int64_t k_h,
                             std::int64_t n_w, std::int64_t n_h, std::int64_t s_w = 1,
                             std::int64_t s_h = 1);

/// C * k^2 * (N_W*N_H + sum_{i=1..l} 4 * N_W/2^i * N_H/2^i).
std::int64_t flops_wtconv_convs(std::int64_t c, std::int64_t k, std::int64_t n_w,
                                std::int64_t n_h, int levels);

struct WaveletFlops {
  std::int64_t wt = 0;
  std::int64_t iwt = 0;
};

/// Naive (stride-2 convolution) cost of the cascade: 4C * sum_{i=0..l-1} N_W/2^i * N_H/2^i,
/// identical for the inverse.
WaveletFlops flops_wt_iwt(std::int64_t c, std::int64_t n_w, std::int64_t n_h, int levels);

struct FlopReport {
  std::int64_t base_flops = 0;          // full-resolution conv
  std::vector<std::int64_t> per_level;  // wavelet-domain conv at level 1..l
  std::int64_t conv_flops = 0;          // base + sum(per_level)
  std::int64_t wt_flops = 0;
  std::int64_t iwt_flops = 0;
  std::int64_t total = 0;
};

FlopReport flop_report(std::int64_t c, std::int64_t k, std::int64_t n_w, std::int64_t n_h,
                       int levels);

/// Short rendering such as "17.9M" or "252M": one decimal below 100 units,
/// none at or above.
std::string human_flops(std::int64_t flops);

/// Runs one instrumented forward pass on a zero input of the given extents
/// and returns the tallied multiply-accumulates.
template <typename Scalar>
MacCounter measured_mac_count(const WTConvParams<Scalar>& p, std::int64_t n, std::int64_t h,
                              std::int64_t w) {
  MacCounter macs;
  wtconv_forward(Tensor4<Scalar>(n, p.c, h, w), p, nullptr, &macs);
  return macs;
}

// ---------------------------------------------------------------------------
// Effective receptive field.

/// Max-normalized map of input-gradient magnitudes (row-major h x w).
struct ErfMap {
  using Grid = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  std::int64_t h = 0, w = 0;
  Grid values;
};

/// Inclusive bounding box of the entries strictly above a threshold.
struct SupportBox {
  bool empty = true;
  std::int64_t y0 = 0, y1 = -1, x0 = 0, x1 = -1;

  std::int64_t height() const { return empty ? 0 : y1 - y0 + 1; }
  std::int64_t width() const { return empty ? 0 : x1 - x0 + 1; }
};

SupportBox support_box(const ErfMap& map, double threshold = 0.0);

/// True when every entry above `threshold` in `inner` is also above it in `outer`.
bool support_contains(const ErfMap& outer, const ErfMap& inner, double threshold = 0.0);

/// Number of entries above the threshold.
std::int64_t support_size(const ErfMap& map, double threshold = 0.0);

/// Central position used as the gradient seed: (h/2, w/2), i.e. the
/// lower-right candidate when an extent is even.
inline std::int64_t center_index(std::int64_t extent) { return extent / 2; }

/// ERF of a stack of layers applied in order.
///
/// For each image: run the stack, seed dY = 1 at the central pixel of the
/// last output (every batch entry and channel) and 0 elsewhere, backpropagate
/// to the input, and add |dX| summed over batch and channels into the map.
/// Images are visited in list order. The result is divided by its maximum.
template <typename Scalar>
ErfMap erf_map(const std::vector<WTConvParams<Scalar>>& stack,
               const std::vector<Tensor4<Scalar>>& images) {
  if (images.empty()) throw ParamError("erf_map: at least one probe image is required");
  if (stack.empty()) throw ParamError("erf_map: the layer stack is empty");
  const Shape4 shape = images.front().shape();
  for (const auto& img : images)
    if (img.shape() != shape)
      throw ShapeError("erf_map: probe images must share one shape; got " + shape.str() +
                       " and " + img.shape().str());

  ErfMap map;
  map.h = shape.h;
  map.w = shape.w;
  map.values = ErfMap::Grid::Zero(shape.h, shape.w);

  for (const auto& img : images) {
    std::vector<Tensor4<Scalar>> inputs;
    inputs.reserve(stack.size());
    Tensor4<Scalar> cur = img;
    for (const auto& layer : stack) {
      inputs.push_back(cur);
      cur = wtconv_forward(cur, layer);
    }
    Tensor4<Scalar> grad(cur.shape());
    const std::int64_t cy = center_index(cur.h()), cx = center_index(cur.w());
    for (std::int64_t b = 0; b < cur.n(); ++b)
      for (std::int64_t ch = 0; ch < cur.c(); ++ch) grad(b, ch, cy, cx) = Scalar(1);
    for (std::size_t i = stack.size(); i-- > 0;)
      grad = wtconv_backward(inputs[i], stack[i], grad).d_input;

    for (std::int64_t b = 0; b < grad.n(); ++b)
      for (std::int64_t ch = 0; ch < grad.c(); ++ch)
        for (std::int64_t y = 0; y < grad.h(); ++y)
          for (std::int64_t x = 0; x < grad.w(); ++x)
            map.values(y, x) += std::abs(static_cast<double>(grad(b, ch, y, x)));
  }

  const double peak = map.values.maxCoeff();
  if (!(peak > 0.0))
    throw ParamError("erf_map: the stack has no input dependence at the central output");
  map.values /= peak;
  return map;
}

/// Comma-separated grid, one image row per line.
std::string erf_to_csv(const ErfMap& map);

/// Binary 8-bit PGM ("P5"), values scaled to 0..255 with rounding.
std::string erf_to_pgm(const ErfMap& map);

}  // namespace wtconv

#endif  // WTCONV_ANALYSIS_HPP
