#ifndef WTCONV_CONV_HPP
#define WTCONV_CONV_HPP

// Depth-wise 2D convolution primitives.
//
// Convention: cross-correlation (no kernel flip) with zero padding,
//   out(n,c,y,x) = sum_{u,v} in(n,c, y*s_h - p_h + u, x*s_w - p_w + v) * w(c,u,v)
// and taps are always accumulated in kernel raster order (u outer, v inner),
// so results do not depend on any scheduling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "wtconv/tensor.hpp"

namespace wtconv {

struct Stride2 {
  std::int64_t h = 1, w = 1;
};

struct Padding2 {
  std::int64_t h = 0, w = 0;
};

/// One k_h x k_w kernel per channel, stored as (c, k_h, k_w) raster.
template <typename Scalar>
class DepthwiseKernel {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  DepthwiseKernel() : DepthwiseKernel(1, 1, 1) {}

  DepthwiseKernel(std::int64_t c, std::int64_t kh, std::int64_t kw,
                  Scalar value = Scalar(0))
      : c_(c), kh_(kh), kw_(kw) {
    if (c < 1 || kh < 1 || kw < 1)
      throw ShapeError("depthwise kernel extents must be >= 1");
    weights_ = Storage::Constant(c * kh * kw, value);
  }

  /// Kernel with a single 1 at the window center in every channel.
  static DepthwiseKernel delta(std::int64_t c, std::int64_t k) {
    if (k % 2 == 0) throw ParamError("delta kernel needs odd extent");
    DepthwiseKernel out(c, k, k);
    for (std::int64_t ch = 0; ch < c; ++ch) out(ch, k / 2, k / 2) = Scalar(1);
    return out;
  }

  std::int64_t c() const { return c_; }
  std::int64_t kh() const { return kh_; }
  std::int64_t kw() const { return kw_; }
  std::int64_t size() const { return c_ * kh_ * kw_; }

  Scalar operator()(std::int64_t ch, std::int64_t u, std::int64_t v) const {
    return weights_[(ch * kh_ + u) * kw_ + v];
  }
  Scalar& operator()(std::int64_t ch, std::int64_t u, std::int64_t v) {
    return weights_[(ch * kh_ + u) * kw_ + v];
  }

  const Scalar* slice(std::int64_t ch) const { return weights_.data() + ch * kh_ * kw_; }
  Scalar* slice(std::int64_t ch) { return weights_.data() + ch * kh_ * kw_; }

  const Storage& values() const { return weights_; }
  Storage& values() { return weights_; }

  bool same_shape(const DepthwiseKernel& o) const {
    return c_ == o.c_ && kh_ == o.kh_ && kw_ == o.kw_;
  }

 private:
  std::int64_t c_, kh_, kw_;
  Storage weights_;
};

/// Per-channel multiplier.
template <typename Scalar>
class ChannelScale {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  ChannelScale() : ChannelScale(1) {}
  explicit ChannelScale(std::int64_t c, Scalar value = Scalar(1)) {
    if (c < 1) throw ShapeError("channel scale needs at least one channel");
    scale_ = Storage::Constant(c, value);
  }
  explicit ChannelScale(Storage s) : scale_(std::move(s)) {
    if (scale_.size() < 1) throw ShapeError("channel scale needs at least one channel");
  }

  std::int64_t c() const { return scale_.size(); }
  Scalar operator[](std::int64_t i) const { return scale_[i]; }
  Scalar& operator[](std::int64_t i) { return scale_[i]; }

  const Storage& values() const { return scale_; }
  Storage& values() { return scale_; }

 private:
  Storage scale_;
};

/// Output extent of a padded strided correlation along one axis.
inline std::int64_t conv_out_extent(std::int64_t in, std::int64_t k,
                                    std::int64_t stride, std::int64_t pad) {
  const std::int64_t span = in + 2 * pad - k;
  if (span < 0) return 0;
  return span / stride + 1;
}

namespace detail {

template <typename Scalar>
void check_conv_args(const Tensor4<Scalar>& x, const DepthwiseKernel<Scalar>& w,
                     Stride2 stride, Padding2 pad, const char* op) {
  if (x.c() != w.c())
    throw ShapeError(std::string(op) + ": input has " + std::to_string(x.c()) +
                     " channels, kernel has " + std::to_string(w.c()));
  if (stride.h < 1 || stride.w < 1)
    throw ShapeError(std::string(op) + ": strides must be >= 1");
  if (pad.h < 0 || pad.w < 0)
    throw ShapeError(std::string(op) + ": padding must be >= 0");
}

/// Output columns [lo, hi) whose tap at kernel column v lands inside [0, in).
inline std::pair<std::int64_t, std::int64_t> tap_columns(std::int64_t v, std::int64_t in,
                                                         std::int64_t out, std::int64_t stride,
                                                         std::int64_t pad) {
  // need 0 <= x*stride - pad + v < in
  const std::int64_t first = pad - v;
  std::int64_t lo = first <= 0 ? 0 : (first + stride - 1) / stride;
  const std::int64_t last = in - 1 + pad - v;
  std::int64_t hi = last < 0 ? 0 : std::min(out, last / stride + 1);
  return {lo, std::max(lo, hi)};
}

/// One channel plane of the strided correlation, written row by row as axpy
/// updates so independent outputs pipeline. Each output still accumulates
/// its taps in (u, v) raster order starting from zero.
template <typename Scalar>
void correlate_plane(const Scalar* src, std::int64_t ih, std::int64_t iw, const Scalar* ker,
                     std::int64_t kh, std::int64_t kw, Stride2 stride, Padding2 pad,
                     Scalar* dst, std::int64_t oh, std::int64_t ow) {
  for (std::int64_t y = 0; y < oh; ++y) {
    const std::int64_t y0 = y * stride.h - pad.h;
    const std::int64_t u_lo = std::max<std::int64_t>(0, -y0);
    const std::int64_t u_hi = std::min(kh, ih - y0);
    Scalar* out = dst + y * ow;
    for (std::int64_t u = u_lo; u < u_hi; ++u) {
      const Scalar* row = src + (y0 + u) * iw;
      for (std::int64_t v = 0; v < kw; ++v) {
        const Scalar k = ker[u * kw + v];
        const auto [lo, hi] = tap_columns(v, iw, ow, stride.w, pad.w);
        const Scalar* in = row + v - pad.w;
        if (stride.w == 1)
          for (std::int64_t x = lo; x < hi; ++x) out[x] += in[x] * k;
        else
          for (std::int64_t x = lo; x < hi; ++x) out[x] += in[x * stride.w] * k;
      }
    }
  }
}

/// Scatter counterpart: dst(iy,ix) += src(y,x) * w(u,v) for every tap inside
/// the destination. For a fixed destination element contributions arrive in
/// (y, x) raster order.
template <typename Scalar>
void scatter_plane(const Scalar* src, std::int64_t oh, std::int64_t ow, const Scalar* ker,
                   std::int64_t kh, std::int64_t kw, Stride2 stride, Padding2 pad,
                   Scalar* dst, std::int64_t in_h, std::int64_t in_w) {
  for (std::int64_t y = 0; y < oh; ++y) {
    const std::int64_t y0 = y * stride.h - pad.h;
    const std::int64_t u_lo = std::max<std::int64_t>(0, -y0);
    const std::int64_t u_hi = std::min(kh, in_h - y0);
    const Scalar* g = src + y * ow;
    for (std::int64_t u = u_lo; u < u_hi; ++u) {
      Scalar* row = dst + (y0 + u) * in_w;
      // Descending v keeps ascending x per destination element.
      for (std::int64_t v = kw - 1; v >= 0; --v) {
        const Scalar k = ker[u * kw + v];
        const auto [lo, hi] = tap_columns(v, in_w, ow, stride.w, pad.w);
        Scalar* out = row + v - pad.w;
        if (stride.w == 1)
          for (std::int64_t x = lo; x < hi; ++x) out[x] += g[x] * k;
        else
          for (std::int64_t x = lo; x < hi; ++x) out[x * stride.w] += g[x] * k;
      }
    }
  }
}

/// Scatter form shared by the transposed convolution and the input gradient,
/// accumulated into an existing tensor of the input extents.
template <typename Scalar>
void conv_input_adjoint_into(Tensor4<Scalar>& dx, const Tensor4<Scalar>& dy,
                             const DepthwiseKernel<Scalar>& w, Stride2 stride, Padding2 pad,
                             std::int64_t* macs) {
  for (std::int64_t b = 0; b < dy.n(); ++b)
    for (std::int64_t ch = 0; ch < dy.c(); ++ch)
      scatter_plane(dy.plane(b, ch), dy.h(), dy.w(), w.slice(ch), w.kh(), w.kw(), stride, pad,
                    dx.plane(b, ch), dx.h(), dx.w());
  if (macs) *macs += dy.size() * w.kh() * w.kw();
}

template <typename Scalar>
Tensor4<Scalar> conv_input_adjoint(const Tensor4<Scalar>& dy,
                                   const DepthwiseKernel<Scalar>& w,
                                   Stride2 stride, Padding2 pad,
                                   std::int64_t in_h, std::int64_t in_w,
                                   std::int64_t* macs) {
  Tensor4<Scalar> dx(dy.n(), dy.c(), in_h, in_w);
  conv_input_adjoint_into(dx, dy, w, stride, pad, macs);
  return dx;
}

}  // namespace detail

/// Strided, zero-padded depth-wise correlation.
///
/// When `macs` is given it is incremented by the number of kernel taps
/// evaluated, padded taps included (out elements * k_h * k_w), which is the
/// quantity the analytic cost model counts.
template <typename Scalar>
Tensor4<Scalar> depthwise_conv(const Tensor4<Scalar>& x,
                               const DepthwiseKernel<Scalar>& w,
                               Stride2 stride = {}, Padding2 pad = {},
                               std::int64_t* macs = nullptr) {
  detail::check_conv_args(x, w, stride, pad, "depthwise_conv");
  const std::int64_t oh = conv_out_extent(x.h(), w.kh(), stride.h, pad.h);
  const std::int64_t ow = conv_out_extent(x.w(), w.kw(), stride.w, pad.w);
  if (oh < 1 || ow < 1)
    throw ShapeError("depthwise_conv: kernel " + std::to_string(w.kh()) + "x" +
                     std::to_string(w.kw()) + " does not fit input " +
                     x.shape().str() + " with the given padding");

  Tensor4<Scalar> out(x.n(), x.c(), oh, ow);
  for (std::int64_t b = 0; b < x.n(); ++b)
    for (std::int64_t ch = 0; ch < x.c(); ++ch)
      detail::correlate_plane(x.plane(b, ch), x.h(), x.w(), w.slice(ch), w.kh(), w.kw(), stride,
                              pad, out.plane(b, ch), oh, ow);
  if (macs) *macs += out.size() * w.kh() * w.kw();
  return out;
}

/// Transposed (fractionally strided) depth-wise convolution: the exact
/// adjoint of depthwise_conv with the same stride and zero padding.
/// Output extents are (h-1)*s_h + k_h by (w-1)*s_w + k_w.
template <typename Scalar>
Tensor4<Scalar> depthwise_conv_transposed(const Tensor4<Scalar>& x,
                                          const DepthwiseKernel<Scalar>& w,
                                          Stride2 stride = {},
                                          std::int64_t* macs = nullptr) {
  detail::check_conv_args(x, w, stride, Padding2{}, "depthwise_conv_transposed");
  return detail::conv_input_adjoint(x, w, stride, Padding2{},
                                    (x.h() - 1) * stride.h + w.kh(),
                                    (x.w() - 1) * stride.w + w.kw(), macs);
}

template <typename Scalar>
Tensor4<Scalar> channel_scale(const Tensor4<Scalar>& x, const ChannelScale<Scalar>& s) {
  if (x.c() != s.c())
    throw ShapeError("channel_scale: input has " + std::to_string(x.c()) +
                     " channels, scale has " + std::to_string(s.c()));
  Tensor4<Scalar> out = x;
  const std::int64_t plane = x.h() * x.w();
  for (std::int64_t b = 0; b < x.n(); ++b)
    for (std::int64_t ch = 0; ch < x.c(); ++ch) {
      Scalar* p = out.plane(b, ch);
      for (std::int64_t i = 0; i < plane; ++i) p[i] *= s[ch];
    }
  return out;
}

}  // namespace wtconv

#endif  // WTCONV_CONV_HPP
