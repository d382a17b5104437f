#ifndef WTCONV_REFERENCE_HPP
#define WTCONV_REFERENCE_HPP

// Straight-line reference implementations used as test oracles.
//
// Everything here works on flat std::vector<double> buffers in n,c,h,w order
// and is written directly from the defining formulas (2x2 Haar block sums,
// zero-padded correlation, the layer's level recursion). Nothing in this
// module calls into the wtconv library.

#include <vector>

#include <Eigen/Core>

namespace wtconv_reference {

struct Dims {
  int n = 1, c = 1, h = 1, w = 1;
  int size() const { return n * c * h * w; }
};

/// Zero-padded strided depth-wise correlation with a (c, kh, kw) kernel.
std::vector<double> conv(const std::vector<double>& x, Dims d,
                         const std::vector<double>& kernel, int kh, int kw,
                         int stride, int pad, Dims* out_dims);

/// One-level 2D Haar analysis; returns {ll, lh, hl, hh}, each (n, c, h/2, w/2).
std::vector<std::vector<double>> haar_analysis(const std::vector<double>& x, Dims d);

/// One-level 2D Haar synthesis from {ll, lh, hl, hh} of dims `half`.
std::vector<double> haar_synthesis(const std::vector<std::vector<double>>& bands, Dims half);

/// Layer parameters in plain buffers; level kernels are (4c, k, k) with the
/// LL, LH, HL, HH channel blocks in that order.
struct LayerSpec {
  int c = 1, k = 1, levels = 0;
  std::vector<double> w0;
  std::vector<std::vector<double>> w_levels;
  std::vector<double> scale0;
  std::vector<std::vector<double>> scale_levels;
};

/// The layer's forward pass written out channel by channel.
std::vector<double> layer_forward(const LayerSpec& spec, const std::vector<double>& x, Dims d);

/// Matrix of the (linear) layer on a single 1 x c x h x w input, assembled by
/// pushing every basis vector through layer_forward.
Eigen::MatrixXd dense_operator(const LayerSpec& spec, int h, int w);

}  // namespace wtconv_reference

#endif  // WTCONV_REFERENCE_HPP
