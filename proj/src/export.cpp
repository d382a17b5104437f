#include <cmath>
#include <cstdio>
#include <string>

#include "wtconv/analysis.hpp"
#include "wtconv/toytrain.hpp"

namespace wtconv {

SupportBox support_box(const ErfMap& map, double threshold) {
  SupportBox box;
  for (std::int64_t y = 0; y < map.h; ++y)
    for (std::int64_t x = 0; x < map.w; ++x) {
      if (!(map.values(y, x) > threshold)) continue;
      if (box.empty) {
        box = {false, y, y, x, x};
      } else {
        box.y0 = std::min(box.y0, y);
        box.y1 = std::max(box.y1, y);
        box.x0 = std::min(box.x0, x);
        box.x1 = std::max(box.x1, x);
      }
    }
  return box;
}

bool support_contains(const ErfMap& outer, const ErfMap& inner, double threshold) {
  if (outer.h != inner.h || outer.w != inner.w)
    throw ShapeError("support_contains: maps differ in extent");
  return ((inner.values > threshold) && !(outer.values > threshold)).count() == 0;
}

std::int64_t support_size(const ErfMap& map, double threshold) {
  return (map.values > threshold).count();
}

std::string erf_to_csv(const ErfMap& map) {
  std::string out;
  char buf[32];
  for (std::int64_t y = 0; y < map.h; ++y) {
    for (std::int64_t x = 0; x < map.w; ++x) {
      std::snprintf(buf, sizeof buf, "%.9g", map.values(y, x));
      if (x) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string erf_to_pgm(const ErfMap& map) {
  std::string out = "P5\n" + std::to_string(map.w) + " " + std::to_string(map.h) + "\n255\n";
  out.reserve(out.size() + map.h * map.w);
  for (std::int64_t y = 0; y < map.h; ++y)
    for (std::int64_t x = 0; x < map.w; ++x) {
      const double v = std::clamp(map.values(y, x), 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
  return out;
}

std::string training_log_csv(const std::vector<EpochStats>& log) {
  std::string out = "epoch,loss,train_acc,test_acc\n";
  char buf[128];
  for (const EpochStats& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.6f,%.6f\n", e.epoch, e.loss, e.train_acc,
                  e.test_acc);
    out += buf;
  }
  return out;
}

}  // namespace wtconv
