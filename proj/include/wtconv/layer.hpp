#ifndef WTCONV_LAYER_HPP
#define WTCONV_LAYER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "wtconv/conv.hpp"
#include "wtconv/tensor.hpp"
#include "wtconv/wavelet.hpp"

namespace wtconv {

/// Trainable state of one WTConv layer.
///
/// Per-level kernels and scales span 4c channels, packed band-major: channels
/// [0, c) are LL, [c, 2c) LH, [2c, 3c) HL and [3c, 4c) HH.
template <typename Scalar>
struct WTConvParams {
  std::int64_t c = 1;
  std::int64_t k = 1;
  int levels = 0;

  DepthwiseKernel<Scalar> w0;
  std::vector<DepthwiseKernel<Scalar>> w_levels;
  ChannelScale<Scalar> scale0;
  std::vector<ChannelScale<Scalar>> scale_levels;

  /// Throws ParamError/ShapeError unless every invariant holds.
  void validate() const {
    if (c < 1) throw ParamError("WTConvParams: channel count must be >= 1");
    if (k < 1 || k % 2 == 0)
      throw ParamError("WTConvParams: kernel extent must be odd, got " + std::to_string(k));
    if (levels < 0) throw ParamError("WTConvParams: level count must be >= 0");
    if (static_cast<int>(w_levels.size()) != levels ||
        static_cast<int>(scale_levels.size()) != levels)
      throw ShapeError("WTConvParams: per-level lists must have length " +
                       std::to_string(levels));
    auto check_kernel = [&](const DepthwiseKernel<Scalar>& w, std::int64_t ch,
                            const std::string& what) {
      if (w.c() != ch || w.kh() != k || w.kw() != k)
        throw ShapeError("WTConvParams: " + what + " must be " + std::to_string(ch) + "x" +
                         std::to_string(k) + "x" + std::to_string(k));
      if (!w.values().allFinite()) throw ParamError("WTConvParams: " + what + " is not finite");
    };
    auto check_scale = [&](const ChannelScale<Scalar>& s, std::int64_t ch,
                           const std::string& what) {
      if (s.c() != ch)
        throw ShapeError("WTConvParams: " + what + " must have " + std::to_string(ch) +
                         " channels");
      if (!s.values().allFinite()) throw ParamError("WTConvParams: " + what + " is not finite");
    };
    check_kernel(w0, c, "w0");
    check_scale(scale0, c, "scale0");
    for (int i = 0; i < levels; ++i) {
      check_kernel(w_levels[i], 4 * c, "w_levels[" + std::to_string(i) + "]");
      check_scale(scale_levels[i], 4 * c, "scale_levels[" + std::to_string(i) + "]");
    }
  }
};

/// Same parameters in another precision.
template <typename To, typename From>
WTConvParams<To> cast_params(const WTConvParams<From>& p) {
  WTConvParams<To> out;
  out.c = p.c;
  out.k = p.k;
  out.levels = p.levels;
  auto kernel = [](const DepthwiseKernel<From>& w) {
    DepthwiseKernel<To> r(w.c(), w.kh(), w.kw());
    r.values() = w.values().template cast<To>();
    return r;
  };
  auto scale = [](const ChannelScale<From>& s) {
    return ChannelScale<To>(typename ChannelScale<To>::Storage(s.values().template cast<To>()));
  };
  out.w0 = kernel(p.w0);
  out.scale0 = scale(p.scale0);
  for (int i = 0; i < p.levels; ++i) {
    out.w_levels.push_back(kernel(p.w_levels[i]));
    out.scale_levels.push_back(scale(p.scale_levels[i]));
  }
  return out;
}

enum class InitScheme {
  UniformFanIn,  // kernels ~ U(-1/k, 1/k), scales 1
  Zeros,         // kernels 0, scales 1
  Identity,      // w0 = centered delta, level kernels 0, scales 1
};

/// Deterministic initialization. Kernel values are drawn in storage order:
/// w0, then each level kernel in turn.
template <typename Scalar>
WTConvParams<Scalar> init_params(std::int64_t c, std::int64_t k, int levels,
                                 std::uint64_t seed,
                                 InitScheme scheme = InitScheme::UniformFanIn) {
  if (c < 1) throw ParamError("init_params: channel count must be >= 1");
  if (k < 1 || k % 2 == 0)
    throw ParamError("init_params: kernel extent must be odd, got " + std::to_string(k));
  if (levels < 0) throw ParamError("init_params: level count must be >= 0");

  WTConvParams<Scalar> p;
  p.c = c;
  p.k = k;
  p.levels = levels;
  p.w0 = DepthwiseKernel<Scalar>(c, k, k);
  p.scale0 = ChannelScale<Scalar>(c);
  for (int i = 0; i < levels; ++i) {
    p.w_levels.emplace_back(4 * c, k, k);
    p.scale_levels.emplace_back(4 * c);
  }

  if (scheme == InitScheme::Identity) {
    p.w0 = DepthwiseKernel<Scalar>::delta(c, k);
  } else if (scheme == InitScheme::UniformFanIn) {
    // Fan-in of a depth-wise kernel is k*k, so the bound is 1/sqrt(k^2) = 1/k.
    const double bound = 1.0 / static_cast<double>(k);
    UniformStream rng(seed);
    auto fill = [&](DepthwiseKernel<Scalar>& w) {
      for (Eigen::Index i = 0; i < w.values().size(); ++i) {
        Scalar v = static_cast<Scalar>(rng.next(-bound, bound));
        // Keep the interval open at both ends after rounding.
        if (!(std::abs(v) < Scalar(bound))) v = Scalar(0);
        w.values()[i] = v;
      }
    };
    fill(p.w0);
    for (auto& w : p.w_levels) fill(w);
  }
  return p;
}

struct ParamBreakdown {
  std::int64_t base_kernel = 0;    // c * k^2
  std::int64_t level_kernels = 0;  // levels * 4 * c * k^2
  std::int64_t base_scale = 0;     // c
  std::int64_t level_scales = 0;   // levels * 4 * c
  std::int64_t total = 0;
};

inline ParamBreakdown param_breakdown(std::int64_t c, std::int64_t k, int levels) {
  ParamBreakdown b;
  b.base_kernel = c * k * k;
  b.level_kernels = static_cast<std::int64_t>(levels) * 4 * c * k * k;
  b.base_scale = c;
  b.level_scales = static_cast<std::int64_t>(levels) * 4 * c;
  b.total = b.base_kernel + b.level_kernels + b.base_scale + b.level_scales;
  return b;
}

template <typename Scalar>
ParamBreakdown param_breakdown(const WTConvParams<Scalar>& p) {
  return param_breakdown(p.c, p.k, p.levels);
}

template <typename Scalar>
std::int64_t param_count(const WTConvParams<Scalar>& p) {
  return param_breakdown(p).total;
}

/// Side length of the square input region one output can see: 2^levels * k.
inline std::int64_t receptive_field(std::int64_t k, int levels) {
  return (std::int64_t{1} << levels) * k;
}

template <typename Scalar>
std::int64_t receptive_field(const WTConvParams<Scalar>& p) {
  return receptive_field(p.k, p.levels);
}

/// Multiply-accumulate tallies gathered during one instrumented run.
struct MacCounter {
  std::int64_t conv = 0;  // base and wavelet-domain convolutions
  std::int64_t wt = 0;
  std::int64_t iwt = 0;

  std::int64_t total() const { return conv + wt + iwt; }
};

/// Stack the four subbands into one 4c-channel tensor (LL, LH, HL, HH blocks).
template <typename Scalar>
Tensor4<Scalar> pack_subbands(const SubbandQuad<Scalar>& q) {
  const Shape4 s = q.shape();
  Tensor4<Scalar> out(s.n, 4 * s.c, s.h, s.w);
  const std::int64_t plane = s.h * s.w;
  for (std::int64_t b = 0; b < s.n; ++b)
    for (int band = 0; band < 4; ++band) {
      const Tensor4<Scalar>& src = q[static_cast<Band>(band)];
      for (std::int64_t ch = 0; ch < s.c; ++ch)
        std::copy_n(src.plane(b, ch), plane, out.plane(b, band * s.c + ch));
    }
  return out;
}

template <typename Scalar>
SubbandQuad<Scalar> unpack_subbands(const Tensor4<Scalar>& packed) {
  if (packed.c() % 4 != 0)
    throw ShapeError("unpack_subbands: channel count must be a multiple of 4");
  const std::int64_t c = packed.c() / 4, plane = packed.h() * packed.w();
  SubbandQuad<Scalar> q;
  for (int band = 0; band < 4; ++band) {
    Tensor4<Scalar>& dst = q[static_cast<Band>(band)];
    dst = Tensor4<Scalar>(packed.n(), c, packed.h(), packed.w());
    for (std::int64_t b = 0; b < packed.n(); ++b)
      for (std::int64_t ch = 0; ch < c; ++ch)
        std::copy_n(packed.plane(b, band * c + ch), plane, dst.plane(b, ch));
  }
  return q;
}

/// Intermediates kept by the forward pass for the backward pass.
template <typename Scalar>
struct WTConvTrace {
  Tensor4<Scalar> base_conv;                 // depthwise_conv(x, w0), before scale0
  std::vector<Tensor4<Scalar>> level_input;  // packed subbands fed to level i's conv
  std::vector<Tensor4<Scalar>> level_conv;   // level i's conv output, before scaling
};

template <typename Scalar>
void require_layer_input(const Tensor4<Scalar>& x, const WTConvParams<Scalar>& p,
                         const char* op) {
  p.validate();
  if (x.c() != p.c)
    throw ShapeError(std::string(op) + ": input has " + std::to_string(x.c()) +
                     " channels, layer expects " + std::to_string(p.c));
  require_wavelet_levels(x.h(), x.w(), p.levels, op);
}

/// WTConv forward pass.
///
///   Y0 = scale0 * conv(x, w0)
///   for i = 1..l:  quad_i = WT(ll_{i-1}),  Y_i = scale_i * conv(pack(quad_i), w_i)
///   Z_{l+1} = 0;  for i = l..1:  Z_i = IWT(Y_i.ll + Z_{i+1}, Y_i.lh, Y_i.hl, Y_i.hh)
///   out = Y0 + Z_1
///
/// All convolutions are stride 1 with (k-1)/2 zero padding, so the output
/// has the input's shape. `trace` and `macs` are optional.
template <typename Scalar>
Tensor4<Scalar> wtconv_forward(const Tensor4<Scalar>& x, const WTConvParams<Scalar>& p,
                               std::type_identity_t<WTConvTrace<Scalar>>* trace = nullptr,
                               MacCounter* macs = nullptr) {
  require_layer_input(x, p, "wtconv_forward");
  const Padding2 same{p.k / 2, p.k / 2};
  std::int64_t* conv_macs = macs ? &macs->conv : nullptr;
  std::int64_t* wt_macs = macs ? &macs->wt : nullptr;
  std::int64_t* iwt_macs = macs ? &macs->iwt : nullptr;
  const auto bank = HaarFilterBank<Scalar>::haar();

  Tensor4<Scalar> base = depthwise_conv(x, p.w0, Stride2{}, same, conv_macs);
  Tensor4<Scalar> out = channel_scale(base, p.scale0);
  if (trace) {
    trace->base_conv = std::move(base);
    trace->level_input.clear();
    trace->level_conv.clear();
  }
  if (p.levels == 0) return out;

  std::vector<SubbandQuad<Scalar>> level_out;
  level_out.reserve(p.levels);
  Tensor4<Scalar> ll = x;
  for (int i = 0; i < p.levels; ++i) {
    SubbandQuad<Scalar> quad = wt_forward(ll, bank, wt_macs);
    Tensor4<Scalar> packed = pack_subbands(quad);
    Tensor4<Scalar> conv = depthwise_conv(packed, p.w_levels[i], Stride2{}, same, conv_macs);
    level_out.push_back(unpack_subbands(channel_scale(conv, p.scale_levels[i])));
    if (trace) {
      trace->level_input.push_back(std::move(packed));
      trace->level_conv.push_back(std::move(conv));
    }
    ll = std::move(quad.ll);
  }

  // Deepest level first; Z_{l+1} = 0 so the innermost ll is used as is.
  Tensor4<Scalar> z = wt_inverse(level_out.back(), bank, iwt_macs);
  for (int i = p.levels - 1; i-- > 0;) {
    SubbandQuad<Scalar>& y = level_out[i];
    y.ll.values() += z.values();
    z = wt_inverse(y, bank, iwt_macs);
  }
  out.values() += z.values();
  return out;
}

}  // namespace wtconv

#endif  // WTCONV_LAYER_HPP
