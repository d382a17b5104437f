#ifndef WTCONV_IO_HPP
#define WTCONV_IO_HPP

// Binary file formats. All integers and values are little-endian.
//
// Tensor dump (.f32t / .f64t):
//   u32 n, u32 c, u32 h, u32 w, then n*c*h*w raw values; the element width
//   is given by the file suffix only.
//
// Parameter file:
//   "WTCV", u32 version (=1), u32 c, u32 k, u32 levels, u32 element bytes,
//   then w0 (c*k*k), w_levels[0..l) (4c*k*k each), scale0 (c),
//   scale_levels[0..l) (4c each), each kernel in (channel, row, col) order.
//   A checkpoint may append a head block:
//   "HEAD", u32 features, u32 classes, weights (classes x features, row
//   major), offsets (classes), in the same element width.

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wtconv/layer.hpp"
#include "wtconv/tensor.hpp"

namespace wtconv {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 4 for ".f32t", 8 for ".f64t", 0 otherwise.
int tensor_file_width(const std::string& path);

namespace detail {
std::vector<char> read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

class ByteReader {
 public:
  ByteReader(const std::vector<char>& bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::uint32_t u32();
  std::string tag();
  /// Reads `count` values of `width` bytes and widens/narrows to double.
  std::vector<double> values(std::size_t count, int width);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n);
  const std::vector<char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v);

template <typename Scalar>
void put_values(std::string& out, const Scalar* data, std::size_t count) {
  out.append(reinterpret_cast<const char*>(data), count * sizeof(Scalar));
}
}  // namespace detail

template <typename Scalar>
std::string encode_tensor(const Tensor4<Scalar>& t) {
  std::string out;
  for (std::int64_t d : {t.n(), t.c(), t.h(), t.w()}) {
    if (d > 0xFFFFFFFFll) throw IoError("tensor extent does not fit the dump header");
    detail::put_u32(out, static_cast<std::uint32_t>(d));
  }
  detail::put_values(out, t.values().data(), t.size());
  return out;
}

template <typename Scalar>
void write_tensor(const std::string& path, const Tensor4<Scalar>& t) {
  if (tensor_file_width(path) != static_cast<int>(sizeof(Scalar)))
    throw IoError("tensor file '" + path + "' must end in " +
                  (sizeof(Scalar) == 4 ? ".f32t" : ".f64t"));
  detail::write_file(path, encode_tensor(t));
}

/// Reads a dump of either width; values are converted to Scalar.
template <typename Scalar>
Tensor4<Scalar> read_tensor(const std::string& path) {
  const int width = tensor_file_width(path);
  if (width == 0) throw IoError("tensor file '" + path + "' must end in .f32t or .f64t");
  const std::vector<char> bytes = detail::read_file(path);
  detail::ByteReader in(bytes, path);
  Shape4 s;
  s.n = in.u32();
  s.c = in.u32();
  s.h = in.u32();
  s.w = in.u32();
  Tensor4<Scalar> t(s);
  const std::vector<double> v = in.values(static_cast<std::size_t>(s.size()), width);
  if (!in.at_end()) throw IoError("tensor file '" + path + "' has trailing bytes");
  for (std::size_t i = 0; i < v.size(); ++i) t.values()[i] = static_cast<Scalar>(v[i]);
  return t;
}

/// Linear classifier stored after the layer parameters in a checkpoint.
template <typename Scalar>
struct HeadBlock {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights;  // classes x features
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> offsets;                               // classes
};

template <typename Scalar>
std::string encode_params(const WTConvParams<Scalar>& p, const HeadBlock<Scalar>* head = nullptr) {
  p.validate();
  std::string out = "WTCV";
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(p.c));
  detail::put_u32(out, static_cast<std::uint32_t>(p.k));
  detail::put_u32(out, static_cast<std::uint32_t>(p.levels));
  detail::put_u32(out, sizeof(Scalar));
  detail::put_values(out, p.w0.values().data(), p.w0.size());
  for (const auto& w : p.w_levels) detail::put_values(out, w.values().data(), w.size());
  detail::put_values(out, p.scale0.values().data(), p.scale0.c());
  for (const auto& s : p.scale_levels) detail::put_values(out, s.values().data(), s.c());
  if (head) {
    out += "HEAD";
    detail::put_u32(out, static_cast<std::uint32_t>(head->weights.cols()));
    detail::put_u32(out, static_cast<std::uint32_t>(head->weights.rows()));
    detail::put_values(out, head->weights.data(), head->weights.size());
    detail::put_values(out, head->offsets.data(), head->offsets.size());
  }
  return out;
}

template <typename Scalar>
void save_params(const std::string& path, const WTConvParams<Scalar>& p,
                 const HeadBlock<Scalar>* head = nullptr) {
  detail::write_file(path, encode_params(p, head));
}

template <typename Scalar>
struct LoadedParams {
  WTConvParams<Scalar> params;
  std::optional<HeadBlock<Scalar>> head;
  int file_width = 0;
};

template <typename Scalar>
LoadedParams<Scalar> load_params(const std::string& path) {
  const std::vector<char> bytes = detail::read_file(path);
  detail::ByteReader in(bytes, path);
  if (in.tag() != "WTCV") throw IoError("'" + path + "' is not a WTConv parameter file");
  if (in.u32() != 1) throw IoError("'" + path + "': unsupported parameter file version");
  LoadedParams<Scalar> r;
  WTConvParams<Scalar>& p = r.params;
  p.c = in.u32();
  p.k = in.u32();
  p.levels = static_cast<int>(in.u32());
  r.file_width = static_cast<int>(in.u32());
  if (r.file_width != 4 && r.file_width != 8)
    throw IoError("'" + path + "': element width must be 4 or 8");
  if (p.c < 1 || p.k < 1 || p.k % 2 == 0 || p.levels > 30)
    throw IoError("'" + path + "': implausible layer header");

  auto fill = [&](auto& storage, std::size_t count) {
    const std::vector<double> v = in.values(count, r.file_width);
    for (std::size_t i = 0; i < count; ++i) storage.data()[i] = static_cast<Scalar>(v[i]);
  };
  p.w0 = DepthwiseKernel<Scalar>(p.c, p.k, p.k);
  fill(p.w0.values(), p.w0.size());
  for (int i = 0; i < p.levels; ++i) {
    p.w_levels.emplace_back(4 * p.c, p.k, p.k);
    fill(p.w_levels.back().values(), p.w_levels.back().size());
  }
  p.scale0 = ChannelScale<Scalar>(p.c);
  fill(p.scale0.values(), p.c);
  for (int i = 0; i < p.levels; ++i) {
    p.scale_levels.emplace_back(4 * p.c);
    fill(p.scale_levels.back().values(), 4 * p.c);
  }
  if (!in.at_end()) {
    if (in.tag() != "HEAD") throw IoError("'" + path + "': unknown trailing block");
    const std::uint32_t features = in.u32(), classes = in.u32();
    HeadBlock<Scalar> head;
    head.weights.resize(classes, features);
    head.offsets.resize(classes);
    fill(head.weights, static_cast<std::size_t>(classes) * features);
    fill(head.offsets, classes);
    r.head = std::move(head);
    if (!in.at_end()) throw IoError("'" + path + "' has trailing bytes");
  }
  p.validate();
  return r;
}

}  // namespace wtconv

#endif  // WTCONV_IO_HPP
