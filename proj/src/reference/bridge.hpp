#ifndef WTCONV_REFERENCE_BRIDGE_HPP
#define WTCONV_REFERENCE_BRIDGE_HPP

// Copies library values into the reference module's plain buffers.

#include <vector>

#include "reference.hpp"
#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv_reference {

template <typename Array>
std::vector<double> to_buffer(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

inline std::vector<double> to_buffer(const wtconv::Tensor4d& t) { return to_buffer(t.values()); }

inline Dims dims_of(const wtconv::Tensor4d& t) {
  return {static_cast<int>(t.n()), static_cast<int>(t.c()), static_cast<int>(t.h()),
          static_cast<int>(t.w())};
}

inline LayerSpec to_spec(const wtconv::WTConvParams<double>& p) {
  LayerSpec s;
  s.c = static_cast<int>(p.c);
  s.k = static_cast<int>(p.k);
  s.levels = p.levels;
  s.w0 = to_buffer(p.w0.values());
  s.scale0 = to_buffer(p.scale0.values());
  for (int i = 0; i < p.levels; ++i) {
    s.w_levels.push_back(to_buffer(p.w_levels[i].values()));
    s.scale_levels.push_back(to_buffer(p.scale_levels[i].values()));
  }
  return s;
}

inline wtconv::Tensor4d from_buffer(const std::vector<double>& v, Dims d) {
  wtconv::Tensor4d t(d.n, d.c, d.h, d.w);
  for (std::size_t i = 0; i < v.size(); ++i) t.values()[i] = v[i];
  return t;
}

/// Random layer with kernels ~ U(-1/k, 1/k) and scales ~ U(0.5, 1.5), so no
/// scale is trivially one.
inline wtconv::WTConvParams<double> random_layer(std::int64_t c, std::int64_t k, int levels,
                                                 std::uint64_t seed) {
  auto p = wtconv::init_params<double>(c, k, levels, seed);
  wtconv::UniformStream rng(seed ^ 0x5CA1Eull);
  for (auto& v : p.scale0.values()) v = rng.next(0.5, 1.5);
  for (auto& s : p.scale_levels)
    for (auto& v : s.values()) v = rng.next(0.5, 1.5);
  return p;
}

}  // namespace wtconv_reference

#endif  // WTCONV_REFERENCE_BRIDGE_HPP
