#include <cstring>
#include <fstream>
#include <iterator>

#include "wtconv/io.hpp"

namespace wtconv {

namespace {
bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

int tensor_file_width(const std::string& path) {
  if (ends_with(path, ".f32t")) return 4;
  if (ends_with(path, ".f64t")) return 8;
  return 0;
}

namespace detail {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void ByteReader::need(std::size_t n) {
  if (bytes_.size() - pos_ < n) throw IoError("'" + what_ + "' is truncated");
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::string ByteReader::tag() {
  need(4);
  std::string t(bytes_.data() + pos_, 4);
  pos_ += 4;
  return t;
}

std::vector<double> ByteReader::values(std::size_t count, int width) {
  if (count > (bytes_.size() - pos_) / static_cast<std::size_t>(width)) need(count * width);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (width == 4) {
      float f;
      std::memcpy(&f, bytes_.data() + pos_, 4);
      out[i] = f;
    } else {
      std::memcpy(&out[i], bytes_.data() + pos_, 8);
    }
    pos_ += width;
  }
  return out;
}

}  // namespace detail
}  // namespace wtconv
