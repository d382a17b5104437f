#ifndef WTCONV_GRAD_HPP
#define WTCONV_GRAD_HPP

// Reverse-mode gradients for the primitives and for the composed layer.
// Every backward here is the exact adjoint of the matching forward.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "wtconv/conv.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"
#include "wtconv/wavelet.hpp"

namespace wtconv {

template <typename Scalar>
struct ConvGrads {
  Tensor4<Scalar> d_input;
  DepthwiseKernel<Scalar> d_weight;
};

/// Gradients of <depthwise_conv(x, w, stride, pad), dy> with respect to x and w.
/// Weight gradients accumulate batch-major, then in output raster order.
template <typename Scalar>
ConvGrads<Scalar> depthwise_conv_backward(const Tensor4<Scalar>& x,
                                          const DepthwiseKernel<Scalar>& w,
                                          const Tensor4<Scalar>& dy, Stride2 stride = {},
                                          Padding2 pad = {}) {
  detail::check_conv_args(x, w, stride, pad, "depthwise_conv_backward");
  const std::int64_t oh = conv_out_extent(x.h(), w.kh(), stride.h, pad.h);
  const std::int64_t ow = conv_out_extent(x.w(), w.kw(), stride.w, pad.w);
  if (dy.n() != x.n() || dy.c() != x.c() || dy.h() != oh || dy.w() != ow)
    throw ShapeError("depthwise_conv_backward: output gradient " + dy.shape().str() +
                     " does not match forward output " +
                     Shape4{x.n(), x.c(), oh, ow}.str());

  ConvGrads<Scalar> g{detail::conv_input_adjoint(dy, w, stride, pad, x.h(), x.w(), nullptr),
                      DepthwiseKernel<Scalar>(w.c(), w.kh(), w.kw())};
  const std::int64_t ih = x.h(), iw = x.w(), kh = w.kh(), kw = w.kw();
  for (std::int64_t b = 0; b < x.n(); ++b) {
    for (std::int64_t ch = 0; ch < x.c(); ++ch) {
      const Scalar* src = x.plane(b, ch);
      const Scalar* grad = dy.plane(b, ch);
      Scalar* dw = g.d_weight.slice(ch);
      for (std::int64_t y = 0; y < oh; ++y) {
        const std::int64_t y0 = y * stride.h - pad.h;
        const std::int64_t u_lo = std::max<std::int64_t>(0, -y0);
        const std::int64_t u_hi = std::min(kh, ih - y0);
        for (std::int64_t xo = 0; xo < ow; ++xo) {
          const std::int64_t x0 = xo * stride.w - pad.w;
          const std::int64_t v_lo = std::max<std::int64_t>(0, -x0);
          const std::int64_t v_hi = std::min(kw, iw - x0);
          const Scalar gv = grad[y * ow + xo];
          for (std::int64_t u = u_lo; u < u_hi; ++u) {
            const Scalar* row = src + (y0 + u) * iw + x0;
            Scalar* dr = dw + u * kw;
            for (std::int64_t v = v_lo; v < v_hi; ++v) dr[v] += gv * row[v];
          }
        }
      }
    }
  }
  return g;
}

template <typename Scalar>
struct ScaleGrads {
  Tensor4<Scalar> d_input;
  ChannelScale<Scalar> d_scale;
};

/// Gradients of <channel_scale(x, s), dy>.
template <typename Scalar>
ScaleGrads<Scalar> channel_scale_backward(const Tensor4<Scalar>& x,
                                          const ChannelScale<Scalar>& s,
                                          const Tensor4<Scalar>& dy) {
  detail::require_same_shape(x, dy, "channel_scale_backward");
  ScaleGrads<Scalar> g{channel_scale(dy, s), ChannelScale<Scalar>(s.c(), Scalar(0))};
  const std::int64_t plane = x.h() * x.w();
  for (std::int64_t b = 0; b < x.n(); ++b)
    for (std::int64_t ch = 0; ch < x.c(); ++ch) {
      const Scalar* xp = x.plane(b, ch);
      const Scalar* gp = dy.plane(b, ch);
      Scalar acc = 0;
      for (std::int64_t i = 0; i < plane; ++i) acc += xp[i] * gp[i];
      g.d_scale[ch] += acc;
    }
  return g;
}

/// Backward of wt_forward. For an orthonormal bank the adjoint of analysis is
/// synthesis, so this is wt_inverse; the tests check the adjoint identity
/// rather than assume it.
template <typename Scalar>
Tensor4<Scalar> wt_backward(const SubbandQuad<Scalar>& d_quad) {
  return wt_inverse(d_quad);
}

/// Backward of wt_inverse, i.e. wt_forward.
template <typename Scalar>
SubbandQuad<Scalar> iwt_backward(const Tensor4<Scalar>& d_out) {
  return wt_forward(d_out);
}

/// Gradients of <wtconv_forward(x, p), dy> for the input and every parameter.
template <typename Scalar>
struct WTConvGrads {
  Tensor4<Scalar> d_input;
  DepthwiseKernel<Scalar> d_w0;
  std::vector<DepthwiseKernel<Scalar>> d_w_levels;
  ChannelScale<Scalar> d_scale0;
  std::vector<ChannelScale<Scalar>> d_scale_levels;
};

template <typename Scalar>
WTConvGrads<Scalar> wtconv_backward(const Tensor4<Scalar>& x, const WTConvParams<Scalar>& p,
                                    const Tensor4<Scalar>& dy,
                                    const std::type_identity_t<WTConvTrace<Scalar>>* trace = nullptr) {
  require_layer_input(x, p, "wtconv_backward");
  if (dy.shape() != x.shape())
    throw ShapeError("wtconv_backward: output gradient " + dy.shape().str() +
                     " does not match layer output " + x.shape().str());
  WTConvTrace<Scalar> local;
  if (!trace) {
    wtconv_forward(x, p, &local);
    trace = &local;
  }
  const Padding2 same{p.k / 2, p.k / 2};
  WTConvGrads<Scalar> g;

  // Base path: out = scale0 * conv(x, w0) + Z_1.
  ScaleGrads<Scalar> base_scale = channel_scale_backward(trace->base_conv, p.scale0, dy);
  ConvGrads<Scalar> base = depthwise_conv_backward(x, p.w0, base_scale.d_input, Stride2{}, same);
  g.d_scale0 = std::move(base_scale.d_scale);
  g.d_w0 = std::move(base.d_weight);
  g.d_input = std::move(base.d_input);
  if (p.levels == 0) return g;

  // Aggregation: Z_i = IWT(Y_i.ll + Z_{i+1}, Y_i.H), so dY_i = WT(dZ_i) and
  // dZ_{i+1} = dY_i.ll, starting from dZ_1 = dy.
  std::vector<Tensor4<Scalar>> d_level_out(p.levels);
  Tensor4<Scalar> dz = dy;
  for (int i = 0; i < p.levels; ++i) {
    SubbandQuad<Scalar> dq = iwt_backward(dz);
    d_level_out[i] = pack_subbands(dq);
    dz = std::move(dq.ll);
  }

  // Wavelet-domain convolutions, then back through the analysis cascade:
  // ll_{i-1} feeds quad_i, and quad_i.ll feeds level i+1.
  g.d_w_levels.resize(p.levels);
  g.d_scale_levels.resize(p.levels);
  Tensor4<Scalar> d_ll;  // gradient reaching quad_{i}.ll from deeper levels
  for (int i = p.levels - 1; i >= 0; --i) {
    ScaleGrads<Scalar> sg =
        channel_scale_backward(trace->level_conv[i], p.scale_levels[i], d_level_out[i]);
    ConvGrads<Scalar> cg = depthwise_conv_backward(trace->level_input[i], p.w_levels[i],
                                                   sg.d_input, Stride2{}, same);
    g.d_scale_levels[i] = std::move(sg.d_scale);
    g.d_w_levels[i] = std::move(cg.d_weight);

    SubbandQuad<Scalar> d_quad = unpack_subbands(cg.d_input);
    if (i + 1 < p.levels) d_quad.ll.values() += d_ll.values();
    d_ll = wt_backward(d_quad);
  }
  g.d_input.values() += d_ll.values();
  return g;
}

/// p - lr * g, coordinate-wise over kernels and scales.
template <typename Scalar>
WTConvParams<Scalar> sgd_step(const WTConvParams<Scalar>& p, const WTConvGrads<Scalar>& g,
                              Scalar lr) {
  if (!std::isfinite(lr)) throw ParamError("sgd_step: learning rate must be finite");
  if (static_cast<int>(g.d_w_levels.size()) != p.levels ||
      static_cast<int>(g.d_scale_levels.size()) != p.levels || !g.d_w0.same_shape(p.w0) ||
      g.d_scale0.c() != p.scale0.c())
    throw ShapeError("sgd_step: gradient structure does not match parameters");
  WTConvParams<Scalar> out = p;
  out.w0.values() -= lr * g.d_w0.values();
  out.scale0.values() -= lr * g.d_scale0.values();
  for (int i = 0; i < p.levels; ++i) {
    if (!g.d_w_levels[i].same_shape(p.w_levels[i]) ||
        g.d_scale_levels[i].c() != p.scale_levels[i].c())
      throw ShapeError("sgd_step: gradient structure does not match parameters");
    out.w_levels[i].values() -= lr * g.d_w_levels[i].values();
    out.scale_levels[i].values() -= lr * g.d_scale_levels[i].values();
  }
  return out;
}

}  // namespace wtconv

#endif  // WTCONV_GRAD_HPP
