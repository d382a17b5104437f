#ifndef WTCONV_TENSOR_HPP
#define WTCONV_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Core>

namespace wtconv {

/// Raised whenever tensor extents are inconsistent with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for out-of-domain scalar arguments (bad ranges, even kernel sizes...).
class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape4 {
  std::int64_t n = 1, c = 1, h = 1, w = 1;

  std::int64_t size() const { return n * c * h * w; }
  std::int64_t plane() const { return h * w; }
  bool operator==(const Shape4&) const = default;

  std::string str() const {
    std::ostringstream os;
    os << n << "x" << c << "x" << h << "x" << w;
    return os.str();
  }
};

/// Dense rank-4 array in batch -> channel -> height -> width row-major order.
///
/// The scalar type is fixed at compile time (float for training, double for
/// verification); operations never mix precisions within one call.
template <typename Scalar>
class Tensor4 {
  static_assert(std::is_floating_point_v<Scalar>);

 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor4() : Tensor4(1, 1, 1, 1) {}

  Tensor4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
          Scalar value = Scalar(0))
      : shape_{n, c, h, w} {
    validate(shape_);
    data_ = Storage::Constant(shape_.size(), value);
  }

  explicit Tensor4(const Shape4& s, Scalar value = Scalar(0))
      : Tensor4(s.n, s.c, s.h, s.w, value) {}

  Tensor4(const Shape4& s, Storage data) : shape_(s), data_(std::move(data)) {
    validate(shape_);
    if (data_.size() != shape_.size())
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
  }

  const Shape4& shape() const { return shape_; }
  std::int64_t n() const { return shape_.n; }
  std::int64_t c() const { return shape_.c; }
  std::int64_t h() const { return shape_.h; }
  std::int64_t w() const { return shape_.w; }
  std::int64_t size() const { return shape_.size(); }

  std::int64_t index(std::int64_t b, std::int64_t ch, std::int64_t y,
                     std::int64_t x) const {
    return ((b * shape_.c + ch) * shape_.h + y) * shape_.w + x;
  }

  Scalar operator()(std::int64_t b, std::int64_t ch, std::int64_t y,
                    std::int64_t x) const {
    return data_[index(b, ch, y, x)];
  }
  Scalar& operator()(std::int64_t b, std::int64_t ch, std::int64_t y,
                     std::int64_t x) {
    return data_[index(b, ch, y, x)];
  }

  /// Pointer to the first element of one (batch, channel) plane.
  const Scalar* plane(std::int64_t b, std::int64_t ch) const {
    return data_.data() + index(b, ch, 0, 0);
  }
  Scalar* plane(std::int64_t b, std::int64_t ch) {
    return data_.data() + index(b, ch, 0, 0);
  }

  const Storage& values() const { return data_; }
  Storage& values() { return data_; }

  static constexpr int element_bytes() { return sizeof(Scalar); }

 private:
  static void validate(const Shape4& s) {
    if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1)
      throw ShapeError("tensor extents must be >= 1, got " + s.str());
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    std::int64_t acc = 1;
    for (std::int64_t d : {s.n, s.c, s.h, s.w}) {
      if (acc > kMax / d) throw ShapeError("tensor shape overflows: " + s.str());
      acc *= d;
    }
    if (acc > static_cast<std::int64_t>(std::numeric_limits<Eigen::Index>::max()))
      throw ShapeError("tensor shape overflows: " + s.str());
  }

  Shape4 shape_;
  Storage data_;
};

using Tensor4f = Tensor4<float>;
using Tensor4d = Tensor4<double>;

template <typename Scalar>
Tensor4<Scalar> new_filled(std::int64_t n, std::int64_t c, std::int64_t h,
                           std::int64_t w, Scalar value) {
  return Tensor4<Scalar>(n, c, h, w, value);
}

/// Deterministic stream of uniform doubles in [0, 1).
///
/// Raw bits come from std::mt19937_64 (the 64-bit Mersenne Twister, whose
/// output sequence is fixed by the C++ standard). Each draw keeps the top 53
/// bits: u = (bits >> 11) * 2^-53. Unlike std::uniform_real_distribution
/// this mapping is identical across standard library implementations.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

  /// Standard normal via Box-Muller on two uniforms.
  double next_normal() {
    const double u1 = 1.0 - next();
    const double u2 = next();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

template <typename Scalar>
Tensor4<Scalar> random_uniform(std::int64_t n, std::int64_t c, std::int64_t h,
                               std::int64_t w, Scalar lo, Scalar hi,
                               std::uint64_t seed) {
  if (!(lo < hi)) throw ParamError("random_uniform requires lo < hi");
  Tensor4<Scalar> t(n, c, h, w);
  UniformStream rng(seed);
  for (Eigen::Index i = 0; i < t.values().size(); ++i) {
    auto v = static_cast<Scalar>(rng.next(lo, hi));
    // Rounding to Scalar (or lo + (hi-lo)*u itself) may land on hi.
    if (!(v < hi)) v = std::nextafter(hi, lo);
    t.values()[i] = v;
  }
  return t;
}

namespace detail {
template <typename Scalar>
void require_same_shape(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b,
                        const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() +
                     " vs " + b.shape().str());
}
}  // namespace detail

template <typename Scalar>
Tensor4<Scalar> add(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  return Tensor4<Scalar>(a.shape(), a.values() + b.values());
}

template <typename Scalar>
Tensor4<Scalar> scalar_mul(const Tensor4<Scalar>& a, Scalar s) {
  return Tensor4<Scalar>(a.shape(), a.values() * s);
}

template <typename Scalar>
Scalar max_abs_diff(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  return (a.values() - b.values()).abs().maxCoeff();
}

template <typename Scalar>
Scalar max_abs(const Tensor4<Scalar>& a) {
  return a.values().abs().maxCoeff();
}

template <typename Scalar>
Scalar l2_norm(const Tensor4<Scalar>& a) {
  return std::sqrt(a.values().square().sum());
}

/// Frobenius inner product, summed in index order.
template <typename Scalar>
Scalar dot(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b) {
  detail::require_same_shape(a, b, "dot");
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < a.values().size(); ++i)
    acc += a.values()[i] * b.values()[i];
  return acc;
}

template <typename To, typename From>
Tensor4<To> cast(const Tensor4<From>& a) {
  return Tensor4<To>(a.shape(), a.values().template cast<To>());
}

}  // namespace wtconv

#endif  // WTCONV_TENSOR_HPP
