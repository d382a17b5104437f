#include "reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace wtconv_reference {

namespace {

int at(Dims d, int b, int ch, int y, int x) { return ((b * d.c + ch) * d.h + y) * d.w + x; }

// Single-channel same-size correlation of an h x w plane with a k x k kernel.
std::vector<double> conv_same_plane(const double* plane, int h, int w, const double* ker, int k) {
  std::vector<double> out(h * w, 0.0);
  const int p = k / 2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) {
          const int iy = y - p + u, ix = x - p + v;
          if (iy >= 0 && iy < h && ix >= 0 && ix < w) acc += plane[iy * w + ix] * ker[u * k + v];
        }
      out[y * w + x] = acc;
    }
  return out;
}

struct Quad {
  std::vector<double> ll, lh, hl, hh;
};

Quad haar_plane(const std::vector<double>& x, int h, int w) {
  Quad q;
  const int hh2 = h / 2, ww2 = w / 2;
  q.ll.assign(hh2 * ww2, 0.0);
  q.lh = q.hl = q.hh = q.ll;
  for (int y = 0; y < hh2; ++y)
    for (int xx = 0; xx < ww2; ++xx) {
      const double a = x[(2 * y) * w + 2 * xx];
      const double b = x[(2 * y) * w + 2 * xx + 1];
      const double c = x[(2 * y + 1) * w + 2 * xx];
      const double d = x[(2 * y + 1) * w + 2 * xx + 1];
      const int o = y * ww2 + xx;
      q.ll[o] = 0.5 * (a + b + c + d);
      q.lh[o] = 0.5 * (a - b + c - d);
      q.hl[o] = 0.5 * (a + b - c - d);
      q.hh[o] = 0.5 * (a - b - c + d);
    }
  return q;
}

std::vector<double> unhaar_plane(const Quad& q, int hh2, int ww2) {
  const int w = 2 * ww2;
  std::vector<double> x(4 * hh2 * ww2, 0.0);
  for (int y = 0; y < hh2; ++y)
    for (int xx = 0; xx < ww2; ++xx) {
      const int o = y * ww2 + xx;
      const double ll = q.ll[o], lh = q.lh[o], hl = q.hl[o], hh = q.hh[o];
      x[(2 * y) * w + 2 * xx] = 0.5 * (ll + lh + hl + hh);
      x[(2 * y) * w + 2 * xx + 1] = 0.5 * (ll - lh + hl - hh);
      x[(2 * y + 1) * w + 2 * xx] = 0.5 * (ll + lh - hl - hh);
      x[(2 * y + 1) * w + 2 * xx + 1] = 0.5 * (ll - lh - hl + hh);
    }
  return x;
}

}  // namespace

std::vector<double> conv(const std::vector<double>& x, Dims d, const std::vector<double>& kernel,
                         int kh, int kw, int stride, int pad, Dims* out_dims) {
  const int oh = (d.h + 2 * pad - kh) / stride + 1;
  const int ow = (d.w + 2 * pad - kw) / stride + 1;
  Dims o{d.n, d.c, oh, ow};
  std::vector<double> out(o.size(), 0.0);
  for (int b = 0; b < d.n; ++b)
    for (int ch = 0; ch < d.c; ++ch)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) {
          double acc = 0.0;
          for (int u = 0; u < kh; ++u)
            for (int v = 0; v < kw; ++v) {
              const int iy = y * stride - pad + u, ix = xx * stride - pad + v;
              if (iy < 0 || iy >= d.h || ix < 0 || ix >= d.w) continue;
              acc += x[at(d, b, ch, iy, ix)] * kernel[(ch * kh + u) * kw + v];
            }
          out[at(o, b, ch, y, xx)] = acc;
        }
  if (out_dims) *out_dims = o;
  return out;
}

std::vector<std::vector<double>> haar_analysis(const std::vector<double>& x, Dims d) {
  Dims half{d.n, d.c, d.h / 2, d.w / 2};
  std::vector<std::vector<double>> bands(4, std::vector<double>(half.size(), 0.0));
  for (int b = 0; b < d.n; ++b)
    for (int ch = 0; ch < d.c; ++ch) {
      std::vector<double> plane(x.begin() + at(d, b, ch, 0, 0),
                                x.begin() + at(d, b, ch, 0, 0) + d.h * d.w);
      Quad q = haar_plane(plane, d.h, d.w);
      const std::vector<double>* src[4] = {&q.ll, &q.lh, &q.hl, &q.hh};
      for (int band = 0; band < 4; ++band)
        std::copy(src[band]->begin(), src[band]->end(),
                  bands[band].begin() + at(half, b, ch, 0, 0));
    }
  return bands;
}

std::vector<double> haar_synthesis(const std::vector<std::vector<double>>& bands, Dims half) {
  Dims full{half.n, half.c, half.h * 2, half.w * 2};
  std::vector<double> out(full.size(), 0.0);
  const int plane = half.h * half.w;
  for (int b = 0; b < half.n; ++b)
    for (int ch = 0; ch < half.c; ++ch) {
      const int off = at(half, b, ch, 0, 0);
      Quad q;
      q.ll.assign(bands[0].begin() + off, bands[0].begin() + off + plane);
      q.lh.assign(bands[1].begin() + off, bands[1].begin() + off + plane);
      q.hl.assign(bands[2].begin() + off, bands[2].begin() + off + plane);
      q.hh.assign(bands[3].begin() + off, bands[3].begin() + off + plane);
      std::vector<double> x = unhaar_plane(q, half.h, half.w);
      std::copy(x.begin(), x.end(), out.begin() + at(full, b, ch, 0, 0));
    }
  return out;
}

std::vector<double> layer_forward(const LayerSpec& s, const std::vector<double>& x, Dims d) {
  if (d.c != s.c) throw std::invalid_argument("reference: channel mismatch");
  const int k = s.k, kk = k * k, c = s.c;
  std::vector<double> out(d.size(), 0.0);

  for (int b = 0; b < d.n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      std::vector<double> x0(x.begin() + at(d, b, ch, 0, 0),
                             x.begin() + at(d, b, ch, 0, 0) + d.h * d.w);

      // Base path.
      std::vector<double> y0 = conv_same_plane(x0.data(), d.h, d.w, &s.w0[ch * kk], k);
      for (double& v : y0) v *= s.scale0[ch];

      // Analysis and per-band convolution, level by level.
      std::vector<Quad> ys;
      std::vector<int> hs, ws;
      std::vector<double> ll = x0;
      int h = d.h, w = d.w;
      for (int i = 0; i < s.levels; ++i) {
        Quad q = haar_plane(ll, h, w);
        h /= 2;
        w /= 2;
        const std::vector<double>& kern = s.w_levels[i];
        const std::vector<double>& sc = s.scale_levels[i];
        Quad y;
        y.ll = conv_same_plane(q.ll.data(), h, w, &kern[(0 * c + ch) * kk], k);
        y.lh = conv_same_plane(q.lh.data(), h, w, &kern[(1 * c + ch) * kk], k);
        y.hl = conv_same_plane(q.hl.data(), h, w, &kern[(2 * c + ch) * kk], k);
        y.hh = conv_same_plane(q.hh.data(), h, w, &kern[(3 * c + ch) * kk], k);
        for (double& v : y.ll) v *= sc[0 * c + ch];
        for (double& v : y.lh) v *= sc[1 * c + ch];
        for (double& v : y.hl) v *= sc[2 * c + ch];
        for (double& v : y.hh) v *= sc[3 * c + ch];
        ys.push_back(y);
        hs.push_back(h);
        ws.push_back(w);
        ll = q.ll;
      }

      // Aggregate from the deepest level up.
      std::vector<double> z;
      for (int i = s.levels - 1; i >= 0; --i) {
        Quad y = ys[i];
        if (!z.empty())
          for (std::size_t j = 0; j < y.ll.size(); ++j) y.ll[j] += z[j];
        z = unhaar_plane(y, hs[i], ws[i]);
      }

      for (int j = 0; j < d.h * d.w; ++j)
        out[at(d, b, ch, 0, 0) + j] = y0[j] + (z.empty() ? 0.0 : z[j]);
    }
  return out;
}

Eigen::MatrixXd dense_operator(const LayerSpec& spec, int h, int w) {
  Dims d{1, spec.c, h, w};
  const int dim = d.size();
  Eigen::MatrixXd m(dim, dim);
  std::vector<double> e(dim, 0.0);
  for (int j = 0; j < dim; ++j) {
    e[j] = 1.0;
    std::vector<double> col = layer_forward(spec, e, d);
    m.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), dim);
    e[j] = 0.0;
  }
  return m;
}

}  // namespace wtconv_reference
