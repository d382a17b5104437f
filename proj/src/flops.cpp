#include <cstdio>
#include <limits>
#include <string>

#include "wtconv/analysis.hpp"
#include "wtconv/wavelet.hpp"

namespace wtconv {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw ParamError("FLOP count overflows 64 bits");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw ParamError("FLOP count overflows 64 bits");
  return r;
}

void require_positive(std::initializer_list<std::int64_t> values, const char* op) {
  for (std::int64_t v : values)
    if (v < 1) throw ParamError(std::string(op) + ": all arguments must be >= 1");
}

void require_levels(std::int64_t n_w, std::int64_t n_h, int levels, const char* op) {
  if (levels < 0) throw ParamError(std::string(op) + ": level count must be >= 0");
  require_wavelet_levels(n_h, n_w, levels, op);
}

}  // namespace

std::int64_t flops_depthwise(std::int64_t c, std::int64_t k_w, std::int64_t k_h,
                             std::int64_t n_w, std::int64_t n_h, std::int64_t s_w,
                             std::int64_t s_h) {
  require_positive({c, k_w, k_h, n_w, n_h, s_w, s_h}, "flops_depthwise");
  if (n_w % s_w != 0 || n_h % s_h != 0)
    throw ParamError("flops_depthwise: strides must divide the spatial extents");
  std::int64_t f = checked_mul(c, checked_mul(k_w, k_h));
  return checked_mul(f, checked_mul(n_w / s_w, n_h / s_h));
}

std::int64_t flops_wtconv_convs(std::int64_t c, std::int64_t k, std::int64_t n_w,
                                std::int64_t n_h, int levels) {
  require_positive({c, k, n_w, n_h}, "flops_wtconv_convs");
  require_levels(n_w, n_h, levels, "flops_wtconv_convs");
  std::int64_t pixels = checked_mul(n_w, n_h);
  for (int i = 1; i <= levels; ++i)
    pixels = checked_add(pixels, checked_mul(4, checked_mul(n_w >> i, n_h >> i)));
  return checked_mul(checked_mul(c, checked_mul(k, k)), pixels);
}

WaveletFlops flops_wt_iwt(std::int64_t c, std::int64_t n_w, std::int64_t n_h, int levels) {
  require_positive({c, n_w, n_h}, "flops_wt_iwt");
  require_levels(n_w, n_h, levels, "flops_wt_iwt");
  std::int64_t pixels = 0;
  for (int i = 0; i < levels; ++i) pixels = checked_add(pixels, checked_mul(n_w >> i, n_h >> i));
  const std::int64_t f = checked_mul(checked_mul(4, c), pixels);
  return {f, f};
}

FlopReport flop_report(std::int64_t c, std::int64_t k, std::int64_t n_w, std::int64_t n_h,
                       int levels) {
  FlopReport r;
  r.base_flops = flops_depthwise(c, k, k, n_w, n_h);
  r.conv_flops = r.base_flops;
  for (int i = 1; i <= levels; ++i) {
    r.per_level.push_back(flops_depthwise(4 * c, k, k, n_w >> i, n_h >> i));
    r.conv_flops = checked_add(r.conv_flops, r.per_level.back());
  }
  const WaveletFlops wf = flops_wt_iwt(c, n_w, n_h, levels);
  r.wt_flops = wf.wt;
  r.iwt_flops = wf.iwt;
  r.total = checked_add(r.conv_flops, checked_add(r.wt_flops, r.iwt_flops));
  return r;
}

std::string human_flops(std::int64_t flops) {
  static constexpr struct {
    double scale;
    const char* suffix;
  } kUnits[] = {{1e12, "T"}, {1e9, "G"}, {1e6, "M"}, {1e3, "K"}};
  const double v = static_cast<double>(flops);
  for (const auto& u : kUnits) {
    if (v >= u.scale) {
      const double x = v / u.scale;
      char buf[64];
      if (x >= 99.95)
        std::snprintf(buf, sizeof buf, "%.0f%s", x, u.suffix);
      else
        std::snprintf(buf, sizeof buf, "%.1f%s", x, u.suffix);
      return buf;
    }
  }
  return std::to_string(flops);
}

}  // namespace wtconv
