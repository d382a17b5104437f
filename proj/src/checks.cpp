#include "wtconv/checks.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "bridge.hpp"
#include "reference.hpp"
#include "wtconv/analysis.hpp"
#include "wtconv/conv.hpp"
#include "wtconv/grad.hpp"
#include "wtconv/gradcheck.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/wavelet.hpp"

namespace wtconv {

namespace {

namespace ref = wtconv_reference;

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

HaarFilterBank<double> bank_for(const CheckOptions& o) {
  auto bank = HaarFilterBank<double>::haar();
  if (o.inject_fault) bank[Band::HH](1, 1) = -bank[Band::HH](1, 1);
  return bank;
}

Outcome orthonormality(const CheckOptions& o) {
  const Eigen::Matrix4d g = bank_for(o).gram();
  const bool ok = (g.array() == Eigen::Matrix4d::Identity().array()).all();
  return {ok, "max |G - I| = " + fmt("%.3g", (g - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff())};
}

Outcome reconstruction(const CheckOptions& o) {
  const auto bank = bank_for(o);
  const auto bankf = HaarFilterBank<float>{{bank.kernels[0].cast<float>(), bank.kernels[1].cast<float>(),
                                            bank.kernels[2].cast<float>(), bank.kernels[3].cast<float>()}};
  double worst64 = 0.0, worst32 = 0.0;
  UniformStream rng(11);
  for (int t = 0; t < 24; ++t) {
    const int levels = 1 + t % 3;
    const std::int64_t side = (std::int64_t{1} << levels) * (1 + rng.next_bits() % 4);
    const auto x = random_uniform<double>(1 + t % 2, 1 + t % 3, side, side, -1.0, 1.0, 100 + t);
    worst64 = std::max(worst64, max_abs_diff(wt_cascade_inverse(wt_cascade(x, levels, bank), bank), x));
    const auto xf = cast<float>(x);
    const float err = max_abs_diff(wt_cascade_inverse(wt_cascade(xf, levels, bankf), bankf), xf);
    worst32 = std::max(worst32, static_cast<double>(err / max_abs(xf)));
  }
  return {worst64 < 1e-12 && worst32 < 1e-5,
          "max err f64 " + fmt("%.3g", worst64) + ", f32 relative " + fmt("%.3g", worst32)};
}

Outcome parseval(const CheckOptions& o) {
  const auto bank = bank_for(o);
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const int levels = 1 + t % 3;
    const auto x = random_uniform<double>(1, 2, 32, 32, -1.0, 1.0, 300 + t);
    const auto p = wt_cascade(x, levels, bank);
    double e = std::pow(l2_norm(p.levels.back().ll), 2);
    for (const auto& q : p.levels)
      e += std::pow(l2_norm(q.lh), 2) + std::pow(l2_norm(q.hl), 2) + std::pow(l2_norm(q.hh), 2);
    const double ref = std::pow(l2_norm(x), 2);
    worst = std::max(worst, std::abs(e - ref) / ref);
  }
  return {worst < 1e-10, "max relative energy error " + fmt("%.3g", worst)};
}

Outcome wavelet_adjoint(const CheckOptions&) {
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto x = random_uniform<double>(2, 3, 8, 12, -1.0, 1.0, 500 + t);
    SubbandQuad<double> q;
    for (Band b : kBands) q[b] = random_uniform<double>(2, 3, 4, 6, -1.0, 1.0, 600 + 4 * t + static_cast<int>(b));
    const auto fx = wt_forward(x);
    double lhs = 0.0;
    for (Band b : kBands) lhs += dot(fx[b], q[b]);
    const double rhs = dot(x, wt_inverse(q));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  return {worst < 1e-12, "max relative probe mismatch " + fmt("%.3g", worst)};
}

Outcome conv_oracle(const CheckOptions&) {
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const std::int64_t k = 1 + t % 4, s = 1 + t % 3, pad = t % 3;
    const auto x = random_uniform<double>(2, 2, 9, 7, -1.0, 1.0, 700 + t);
    DepthwiseKernel<double> w(2, k, k);
    w.values() = random_uniform<double>(1, 2, k, k, -1.0, 1.0, 800 + t).values();
    const auto y = depthwise_conv(x, w, Stride2{s, s}, Padding2{pad, pad});
    ref::Dims od;
    const auto r = ref::conv(ref::to_buffer(x), ref::dims_of(x), ref::to_buffer(w.values()),
                             static_cast<int>(k), static_cast<int>(k), static_cast<int>(s),
                             static_cast<int>(pad), &od);
    worst = std::max(worst, max_abs_diff(y, ref::from_buffer(r, od)));
  }
  return {worst < 1e-12, "max abs error " + fmt("%.3g", worst)};
}

Outcome conv_adjoint(const CheckOptions&) {
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const std::int64_t k = 1 + t % 4, s = 1 + t % 3;
    const std::int64_t oh = 3 + t % 4, ow = 4 + t % 3;
    const std::int64_t ih = (oh - 1) * s + k, iw = (ow - 1) * s + k;
    const auto x = random_uniform<double>(2, 3, ih, iw, -1.0, 1.0, 900 + t);
    const auto y = random_uniform<double>(2, 3, oh, ow, -1.0, 1.0, 950 + t);
    DepthwiseKernel<double> w(3, k, k);
    w.values() = random_uniform<double>(1, 3, k, k, -1.0, 1.0, 990 + t).values();
    const double lhs = dot(depthwise_conv(x, w, Stride2{s, s}), y);
    const double rhs = dot(x, depthwise_conv_transposed(y, w, Stride2{s, s}));
    worst = std::max(worst, relative_error(lhs, rhs));
  }
  return {worst < 1e-12, "max relative probe mismatch " + fmt("%.3g", worst)};
}

Outcome dense_oracle(const CheckOptions&) {
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const auto p = ref::random_layer(2, 3, t % 3, 40 + t);
    const Eigen::MatrixXd m = ref::dense_operator(ref::to_spec(p), 16, 16);
    const auto x = random_uniform<double>(1, 2, 16, 16, -1.0, 1.0, 70 + t);
    const Eigen::VectorXd expect = m * x.values().matrix();
    const auto y = wtconv_forward(x, p);
    worst = std::max(worst, (y.values().matrix() - expect).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10, "max abs error " + fmt("%.3g", worst)};
}

Outcome dense_adjoint(const CheckOptions&) {
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const auto p = ref::random_layer(2, 3, t % 3, 140 + t);
    const Eigen::MatrixXd m = ref::dense_operator(ref::to_spec(p), 16, 16);
    const auto x = random_uniform<double>(1, 2, 16, 16, -1.0, 1.0, 170 + t);
    const auto dy = random_uniform<double>(1, 2, 16, 16, -1.0, 1.0, 190 + t);
    const Eigen::VectorXd expect = m.transpose() * dy.values().matrix();
    const auto g = wtconv_backward(x, p, dy);
    worst = std::max(worst, (g.d_input.values().matrix() - expect).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10, "max abs error " + fmt("%.3g", worst)};
}

Outcome finite_differences(const CheckOptions&) {
  const auto p = ref::random_layer(2, 3, 2, 7);
  const auto x = random_uniform<double>(1, 2, 16, 16, -1.0, 1.0, 8);
  const auto dy = random_uniform<double>(1, 2, 16, 16, -1.0, 1.0, 9);
  const GradCheckReport r = finite_difference_check<double, long double>(x, p, dy, 1e-5);
  return {r.max_rel_error < 1e-6, std::to_string(r.coordinates) + " coordinates, max relative error " +
                                      fmt("%.3g", r.max_rel_error) + " at " + r.worst};
}

Outcome published_flops(const CheckOptions&) {
  const bool ok = flops_depthwise(1, 7, 7, 512, 512) == 12'845'056 &&
                  flops_depthwise(1, 31, 31, 512, 512) == 251'920'384 &&
                  flops_wtconv_convs(1, 5, 512, 512, 3) == 15'155'200 &&
                  flops_wt_iwt(1, 512, 512, 3).wt * 2 == 2'752'512 &&
                  flop_report(1, 5, 512, 512, 3).total == 17'907'712;
  return {ok, ok ? "12,845,056 / 251,920,384 / 15,155,200 / 2,752,512 / 17,907,712 reproduced"
                 : "mismatch"};
}

Outcome measured_flops(const CheckOptions&) {
  bool ok = true;
  for (int levels = 0; levels <= 3; ++levels) {
    const auto p = init_params<double>(2, 5, levels, 1);
    const MacCounter m = measured_mac_count(p, 1, 32, 32);
    const FlopReport r = flop_report(2, 5, 32, 32, levels);
    ok = ok && m.conv == r.conv_flops && m.wt == r.wt_flops && m.iwt == r.iwt_flops;
  }
  return {ok, ok ? "instrumented MACs equal the cost model for levels 0..3" : "mismatch"};
}

struct Suite {
  const char* name;
  std::function<Outcome(const CheckOptions&)> run;
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all = {
      {"wavelet.orthonormality", orthonormality},
      {"wavelet.reconstruction", reconstruction},
      {"wavelet.parseval", parseval},
      {"wavelet.adjoint", wavelet_adjoint},
      {"conv.oracle", conv_oracle},
      {"conv.adjoint", conv_adjoint},
      {"wtconv.dense_oracle", dense_oracle},
      {"grad.dense_adjoint", dense_adjoint},
      {"grad.finite_difference", finite_differences},
      {"flops.published_values", published_flops},
      {"flops.measured", measured_flops},
  };
  return all;
}

}  // namespace

std::vector<std::string> check_suite_names() {
  std::vector<std::string> names;
  for (const auto& s : suites()) names.emplace_back(s.name);
  return names;
}

std::vector<CheckResult> run_checks(const CheckOptions& opts) {
  std::vector<CheckResult> out;
  for (const auto& s : suites()) {
    const std::string name = s.name;
    const std::string group = name.substr(0, name.find('.'));
    if (!opts.group.empty() && opts.group != group && opts.group != name) continue;
    try {
      const Outcome r = s.run(opts);
      out.push_back({name, r.passed, r.detail});
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

}  // namespace wtconv
