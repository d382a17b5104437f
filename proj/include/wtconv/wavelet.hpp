#ifndef WTCONV_WAVELET_HPP
#define WTCONV_WAVELET_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wtconv/conv.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv {

enum class Band : int { LL = 0, LH = 1, HL = 2, HH = 3 };

inline constexpr std::array<Band, 4> kBands = {Band::LL, Band::LH, Band::HL, Band::HH};

/// Four 2x2 analysis kernels; synthesis uses the same kernels transposed.
///
/// Kept as a value so another orthonormal bank can be swapped in. `haar()`
/// returns the orthonormal 2D Haar bank:
///   LL = 1/2 [[1, 1], [ 1,  1]]    LH = 1/2 [[1, -1], [ 1, -1]]
///   HL = 1/2 [[1, 1], [-1, -1]]    HH = 1/2 [[1, -1], [-1,  1]]
template <typename Scalar>
struct HaarFilterBank {
  using Kernel = Eigen::Matrix<Scalar, 2, 2, Eigen::RowMajor>;

  std::array<Kernel, 4> kernels;

  const Kernel& operator[](Band b) const { return kernels[static_cast<int>(b)]; }
  Kernel& operator[](Band b) { return kernels[static_cast<int>(b)]; }

  static HaarFilterBank haar() {
    HaarFilterBank bank;
    const Scalar h = Scalar(0.5);
    bank[Band::LL] << h, h, h, h;
    bank[Band::LH] << h, -h, h, -h;
    bank[Band::HL] << h, h, -h, -h;
    bank[Band::HH] << h, -h, -h, h;
    return bank;
  }

  /// 4x4 Gram matrix of the flattened kernels.
  Eigen::Matrix<Scalar, 4, 4> gram() const {
    Eigen::Matrix<Scalar, 4, 4> flat;
    for (int b = 0; b < 4; ++b)
      flat.row(b) = Eigen::Map<const Eigen::Matrix<Scalar, 1, 4>>(kernels[b].data());
    return flat * flat.transpose();
  }

  /// The kernel of one band replicated over `c` channels.
  DepthwiseKernel<Scalar> depthwise(Band b, std::int64_t c) const {
    DepthwiseKernel<Scalar> k(c, 2, 2);
    const Kernel& f = (*this)[b];
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) k(ch, u, v) = f(u, v);
    return k;
  }
};

/// One decomposition level: four subbands at half the input resolution.
template <typename Scalar>
struct SubbandQuad {
  Tensor4<Scalar> ll, lh, hl, hh;

  const Tensor4<Scalar>& operator[](Band b) const {
    switch (b) {
      case Band::LL: return ll;
      case Band::LH: return lh;
      case Band::HL: return hl;
      default: return hh;
    }
  }
  Tensor4<Scalar>& operator[](Band b) {
    return const_cast<Tensor4<Scalar>&>(std::as_const(*this)[b]);
  }

  const Shape4& shape() const { return ll.shape(); }

  bool well_formed() const {
    return lh.shape() == ll.shape() && hl.shape() == ll.shape() &&
           hh.shape() == ll.shape();
  }
};

/// levels[i] holds decomposition level i+1; levels[i+1] was computed from
/// levels[i].ll.
template <typename Scalar>
struct WaveletPyramid {
  std::vector<SubbandQuad<Scalar>> levels;

  std::size_t depth() const { return levels.size(); }
};

/// Largest level count l such that both extents are divisible by 2^l.
inline int max_wavelet_levels(std::int64_t h, std::int64_t w) {
  return std::min(std::countr_zero(static_cast<std::uint64_t>(h)),
                  std::countr_zero(static_cast<std::uint64_t>(w)));
}

inline void require_wavelet_levels(std::int64_t h, std::int64_t w, int levels,
                                   const char* op) {
  if (levels < 0) throw ParamError(std::string(op) + ": level count must be >= 0");
  const int admissible = max_wavelet_levels(h, w);
  if (levels > admissible)
    throw ShapeError(std::string(op) + ": spatial extents " + std::to_string(h) +
                     "x" + std::to_string(w) + " are not divisible by 2^" +
                     std::to_string(levels) + "; maximum admissible level count is " +
                     std::to_string(admissible));
}

/// Single-level analysis: stride-2 depth-wise correlation with each kernel.
template <typename Scalar>
SubbandQuad<Scalar> wt_forward(const Tensor4<Scalar>& x,
                               const HaarFilterBank<Scalar>& bank = HaarFilterBank<Scalar>::haar(),
                               std::int64_t* macs = nullptr) {
  if (x.h() % 2 != 0 || x.w() % 2 != 0)
    throw ShapeError("wt_forward: spatial extents must be even, got " + x.shape().str());
  SubbandQuad<Scalar> q;
  for (Band b : kBands)
    q[b] = depthwise_conv(x, bank.depthwise(b, x.c()), Stride2{2, 2}, Padding2{}, macs);
  return q;
}

/// Single-level synthesis: sum of stride-2 transposed correlations, the
/// adjoint of wt_forward (and, for an orthonormal bank, its inverse).
template <typename Scalar>
Tensor4<Scalar> wt_inverse(const SubbandQuad<Scalar>& q,
                           const HaarFilterBank<Scalar>& bank = HaarFilterBank<Scalar>::haar(),
                           std::int64_t* macs = nullptr) {
  if (!q.well_formed())
    throw ShapeError("wt_inverse: subbands disagree in shape (ll " + q.ll.shape().str() +
                     ", lh " + q.lh.shape().str() + ", hl " + q.hl.shape().str() +
                     ", hh " + q.hh.shape().str() + ")");
  const Shape4& s = q.shape();
  Tensor4<Scalar> out(s.n, s.c, 2 * s.h, 2 * s.w);
  for (Band b : kBands)
    detail::conv_input_adjoint_into(out, q[b], bank.depthwise(b, s.c), Stride2{2, 2},
                                    Padding2{}, macs);
  return out;
}

/// Multi-level decomposition, recursing on the low-pass band.
template <typename Scalar>
WaveletPyramid<Scalar> wt_cascade(const Tensor4<Scalar>& x, int levels,
                                  const HaarFilterBank<Scalar>& bank = HaarFilterBank<Scalar>::haar(),
                                  std::int64_t* macs = nullptr) {
  if (levels < 1) throw ParamError("wt_cascade: level count must be >= 1");
  require_wavelet_levels(x.h(), x.w(), levels, "wt_cascade");
  WaveletPyramid<Scalar> p;
  p.levels.reserve(levels);
  p.levels.push_back(wt_forward(x, bank, macs));
  for (int i = 1; i < levels; ++i) p.levels.push_back(wt_forward(p.levels.back().ll, bank, macs));
  return p;
}

/// Inverse of wt_cascade. Only the deepest low-pass band is read; the
/// intermediate ll bands are rebuilt from the levels below them.
template <typename Scalar>
Tensor4<Scalar> wt_cascade_inverse(const WaveletPyramid<Scalar>& p,
                                   const HaarFilterBank<Scalar>& bank = HaarFilterBank<Scalar>::haar(),
                                   std::int64_t* macs = nullptr) {
  if (p.levels.empty()) throw ShapeError("wt_cascade_inverse: empty pyramid");
  for (std::size_t i = 0; i < p.levels.size(); ++i) {
    if (!p.levels[i].well_formed())
      throw ShapeError("wt_cascade_inverse: level " + std::to_string(i + 1) +
                       " has subbands of different shapes");
    if (i + 1 < p.levels.size()) {
      const Shape4& fine = p.levels[i].shape();
      const Shape4& coarse = p.levels[i + 1].shape();
      if (coarse.n != fine.n || coarse.c != fine.c || 2 * coarse.h != fine.h ||
          2 * coarse.w != fine.w)
        throw ShapeError("wt_cascade_inverse: level " + std::to_string(i + 2) + " (" +
                         coarse.str() + ") is not half of level " +
                         std::to_string(i + 1) + " (" + fine.str() + ")");
    }
  }
  Tensor4<Scalar> cur = wt_inverse(p.levels.back(), bank, macs);
  for (std::size_t i = p.levels.size() - 1; i-- > 0;) {
    const SubbandQuad<Scalar>& lvl = p.levels[i];
    cur = wt_inverse(SubbandQuad<Scalar>{std::move(cur), lvl.lh, lvl.hl, lvl.hh}, bank, macs);
  }
  return cur;
}

}  // namespace wtconv

#endif  // WTCONV_WAVELET_HPP
