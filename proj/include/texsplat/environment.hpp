#pragma once

#include "texsplat/math.hpp"

#include <array>
#include <vector>

namespace texsplat {

/// Equirectangular RGB radiance grid, z-up: theta = angle from +z, phi =
/// atan2(y, x). Texel (i, j) covers phi in [i, i+1) * 2pi/W - pi and theta in
/// [j, j+1) * pi/H. Bilinear filtering wraps in phi and clamps in theta.
struct LatLongMap {
  int width = 4;
  int height = 2;
  std::vector<float> texels = std::vector<float>(4 * 2 * 3, 0.0f);

  LatLongMap() = default;
  LatLongMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), texels(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::size_t texel_count() const { return static_cast<std::size_t>(width) * height; }
  Vec3 texel(int i, int j) const {
    const float* p = &texels[(static_cast<std::size_t>(j) * width + i) * 3];
    return {p[0], p[1], p[2]};
  }
  void set_texel(int i, int j, const Vec3& rgb) {
    float* p = &texels[(static_cast<std::size_t>(j) * width + i) * 3];
    for (int c = 0; c < 3; ++c) {
      p[c] = static_cast<float>(rgb[c]);
    }
  }
  Vec3 texel_direction(int i, int j) const;
  /// Solid angle of a texel in row j: sin(theta) dtheta dphi at the row center.
  double texel_solid_angle(int j) const;

  Vec3 sample(const Vec3& dir) const;
  bool operator==(const LatLongMap&) const = default;
};

/// A bilinear footprint on one map: flat texel indices and weights.
struct MapTaps {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
};

struct LatLongSample {
  Vec3 value = Vec3::Zero();
  /// d value_c / d dir_k at row c, column k.
  Mat3 d_dir = Mat3::Zero();
  MapTaps taps;
};

LatLongSample sample_with_grad(const LatLongMap& map, const Vec3& dir);

inline constexpr int kDefaultEnvLevels = 6;
inline constexpr int kDefaultEnvWidth = 256;
inline constexpr int kDefaultEnvHeight = 128;
inline constexpr int kDefaultDiffuseWidth = 32;
inline constexpr int kDefaultDiffuseHeight = 16;

/// Level l of a W x H base has max(4, W >> l) x max(2, H >> l) texels.
std::pair<int, int> mip_resolution(int base_width, int base_height, int level);

/// GGX-prefiltered pyramid; level 0 is the base map, level l uses
/// roughness l / (levels - 1).
std::vector<LatLongMap> prefilter_specular(const LatLongMap& base, int levels = kDefaultEnvLevels);

/// E(n) = sum over texels L(w) max(0, n.w) dw, sampled at the output texel centers.
LatLongMap diffuse_irradiance(const LatLongMap& base, int width = kDefaultDiffuseWidth,
                               int height = kDefaultDiffuseHeight);

struct SpecularSample {
  Vec3 value = Vec3::Zero();
  Mat3 d_dir = Mat3::Zero();
  Vec3 d_roughness = Vec3::Zero();
  int level0 = 0;
  int level1 = 0;
  double level_frac = 0.0;
  MapTaps taps0;
  MapTaps taps1;
};

/// Learnable lighting: specular mip pyramid and diffuse irradiance map.
/// Both are free parameter grids once built.
struct EnvironmentLight {
  std::vector<LatLongMap> specular = std::vector<LatLongMap>(1);
  LatLongMap diffuse;
  bool learnable = true;

  int levels() const { return static_cast<int>(specular.size()); }

  /// Trilinear lookup: bilinear within a level, linear across levels at
  /// level = roughness * (levels - 1).
  Vec3 sample_specular(const Vec3& dir, double roughness) const;
  SpecularSample sample_specular_with_grad(const Vec3& dir, double roughness) const;
  Vec3 sample_diffuse(const Vec3& dir) const { return diffuse.sample(dir); }

  static EnvironmentLight from_base(const LatLongMap& base, int levels = kDefaultEnvLevels,
                                    int diffuse_width = kDefaultDiffuseWidth,
                                    int diffuse_height = kDefaultDiffuseHeight);
  static EnvironmentLight constant(const Vec3& radiance, int base_width = kDefaultEnvWidth,
                                   int base_height = kDefaultEnvHeight,
                                   int levels = kDefaultEnvLevels,
                                   int diffuse_width = kDefaultDiffuseWidth,
                                   int diffuse_height = kDefaultDiffuseHeight);
  bool operator==(const EnvironmentLight&) const = default;
};

} // namespace texsplat
