#pragma once

#include "texsplat/math.hpp"

#include <stdexcept>
#include <vector>

namespace texsplat {

/// Interleaved row-major image, top row first.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 3, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  double& at(int x, int y, int c) { return data[index(x, y) * channels + c]; }
  double at(int x, int y, int c) const { return data[index(x, y) * channels + c]; }
  Vec3 rgb(int x, int y) const {
    const double* p = &data[index(x, y) * channels];
    return {p[0], p[1], p[2]};
  }
  void set_rgb(int x, int y, const Vec3& v) {
    double* p = &data[index(x, y) * channels];
    p[0] = v[0];
    p[1] = v[1];
    p[2] = v[2];
  }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool operator==(const Image&) const = default;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": image dimensions differ");
  }
}

} // namespace texsplat
