#ifndef WTCONV_INGEST_HPP
#define WTCONV_INGEST_HPP

// Input ingestion for the CLI: the layer rejects extents that are not
// multiples of 2^levels, so inputs are mirror-padded at the bottom/right
// edges before the forward pass and cropped afterwards.

#include <cstdint>

#include "wtconv/tensor.hpp"

namespace wtconv {

/// Mirror index without repeating the edge sample (... 2 1 | 0 1 2 ... n-1 | n-2 ...).
inline std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  std::int64_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

inline std::int64_t round_up_to_multiple(std::int64_t v, std::int64_t m) {
  return (v + m - 1) / m * m;
}

/// Extends x to (h, w) by reflection; rows/columns are appended at the end.
template <typename Scalar>
Tensor4<Scalar> reflect_pad(const Tensor4<Scalar>& x, std::int64_t h, std::int64_t w) {
  if (h < x.h() || w < x.w()) throw ShapeError("reflect_pad: target is smaller than input");
  Tensor4<Scalar> out(x.n(), x.c(), h, w);
  for (std::int64_t b = 0; b < x.n(); ++b)
    for (std::int64_t ch = 0; ch < x.c(); ++ch)
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t xx = 0; xx < w; ++xx)
          out(b, ch, y, xx) = x(b, ch, reflect_index(y, x.h()), reflect_index(xx, x.w()));
  return out;
}

/// Top-left (h, w) window.
template <typename Scalar>
Tensor4<Scalar> crop(const Tensor4<Scalar>& x, std::int64_t h, std::int64_t w) {
  if (h > x.h() || w > x.w()) throw ShapeError("crop: window exceeds input");
  Tensor4<Scalar> out(x.n(), x.c(), h, w);
  for (std::int64_t b = 0; b < x.n(); ++b)
    for (std::int64_t ch = 0; ch < x.c(); ++ch)
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t xx = 0; xx < w; ++xx) out(b, ch, y, xx) = x(b, ch, y, xx);
  return out;
}

}  // namespace wtconv

#endif  // WTCONV_INGEST_HPP
