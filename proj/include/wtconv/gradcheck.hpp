#ifndef WTCONV_GRADCHECK_HPP
#define WTCONV_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "wtconv/grad.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv {

/// |a - b| / max(|a|, |b|); zero when both are zero.
inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

struct GradCheckReport {
  std::int64_t coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst;  // name of the coordinate with the largest relative error
};

/// Compares wtconv_backward (run in Scalar) against central differences of
/// L(x, p) = <wtconv_forward(x, p), dy> for every input and parameter
/// coordinate. Only the forward pass is used to build the reference.
///
/// The difference quotients are evaluated in `Oracle` precision. L is linear
/// in each single coordinate, so the quotient is exact up to rounding; with
/// Oracle = Scalar = double that rounding floor (~1e-9 absolute at eps=1e-5)
/// dominates the relative error of near-zero components, while an extended
/// precision oracle keeps the reference accurate enough to judge a 64-bit
/// gradient.
template <typename Scalar, typename Oracle = Scalar>
GradCheckReport finite_difference_check(const Tensor4<Scalar>& x_in,
                                        const WTConvParams<Scalar>& p_in,
                                        const Tensor4<Scalar>& dy_in, double eps_in) {
  const WTConvGrads<Scalar> g = wtconv_backward(x_in, p_in, dy_in);
  const Tensor4<Oracle> x = cast<Oracle>(x_in);
  const Tensor4<Oracle> dy = cast<Oracle>(dy_in);
  const WTConvParams<Oracle> p = cast_params<Oracle>(p_in);
  const Oracle eps = static_cast<Oracle>(eps_in);
  GradCheckReport rep;

  auto record = [&](double analytic, double numeric, const std::string& name) {
    ++rep.coordinates;
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(analytic - numeric));
    const double rel = relative_error(analytic, numeric);
    if (rel >= rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst = name;
    }
  };

  {
    Tensor4<Oracle> xp = x;
    for (Eigen::Index i = 0; i < x.values().size(); ++i) {
      const Oracle orig = xp.values()[i];
      xp.values()[i] = orig + eps;
      const Oracle up = dot(wtconv_forward(xp, p), dy);
      xp.values()[i] = orig - eps;
      const Oracle down = dot(wtconv_forward(xp, p), dy);
      xp.values()[i] = orig;
      record(g.d_input.values()[i], static_cast<double>((up - down) / (2 * eps)),
             "input[" + std::to_string(i) + "]");
    }
  }

  WTConvParams<Oracle> q = p;
  auto probe = [&](auto& storage, const auto& analytic, const std::string& name) {
    for (Eigen::Index i = 0; i < storage.size(); ++i) {
      const Oracle orig = storage[i];
      storage[i] = orig + eps;
      const Oracle up = dot(wtconv_forward(x, q), dy);
      storage[i] = orig - eps;
      const Oracle down = dot(wtconv_forward(x, q), dy);
      storage[i] = orig;
      record(analytic[i], static_cast<double>((up - down) / (2 * eps)),
             name + "[" + std::to_string(i) + "]");
    }
  };
  probe(q.w0.values(), g.d_w0.values(), "w0");
  probe(q.scale0.values(), g.d_scale0.values(), "scale0");
  for (int l = 0; l < p.levels; ++l) {
    probe(q.w_levels[l].values(), g.d_w_levels[l].values(), "w_levels" + std::to_string(l));
    probe(q.scale_levels[l].values(), g.d_scale_levels[l].values(),
          "scale_levels" + std::to_string(l));
  }
  return rep;
}

}  // namespace wtconv

#endif  // WTCONV_GRADCHECK_HPP
