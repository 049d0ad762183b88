#pragma once

#include "texsplat/math.hpp"
#include "texsplat/splat.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace texsplat {

enum class TextureSemantic { Albedo, Roughness, Metallic, TangentNormalXY, Generic };

std::string_view to_string(TextureSemantic semantic);

/// Channel counts of one material texture set, in serialization order.
struct ChannelLayout {
  int albedo = 3;
  int roughness = 1;
  int metallic = 1;
  int tangent_normal = 2;

  int total() const { return albedo + roughness + metallic + tangent_normal; }
};

struct TextureConfig {
  int resolution = 4;
  /// Kernel support in standard deviations mapped onto [0, 1].
  double support = 3.0;
  ChannelLayout layout;

  bool valid() const { return resolution >= 1 && support > 0.0; }
  double half_texel() const { return 0.5 / resolution; }
};

/// T x T texels with C channels, row-major: texel (i, j) channel c is
/// texels[(j * T + i) * C + c], where i runs along s and j along t.
/// Storage is single precision; arithmetic on samples is double.
struct TextureMap {
  int resolution = 1;
  int channels = 1;
  TextureSemantic semantic = TextureSemantic::Generic;
  std::vector<float> texels;

  TextureMap() : texels(1, 0.0f) {}
  TextureMap(int res, int ch, TextureSemantic sem, float fill = 0.0f)
      : resolution(res), channels(ch), semantic(sem),
        texels(static_cast<std::size_t>(res) * res * ch, fill) {}

  int texel_count() const { return resolution * resolution; }
  float& at(int i, int j, int c) { return texels[(static_cast<std::size_t>(j) * resolution + i) * channels + c]; }
  float at(int i, int j, int c) const {
    return texels[(static_cast<std::size_t>(j) * resolution + i) * channels + c];
  }
  bool operator==(const TextureMap&) const = default;
};

struct MaterialTextureSet {
  TextureMap albedo{1, 3, TextureSemantic::Albedo, 0.5f};
  TextureMap roughness{1, 1, TextureSemantic::Roughness, 0.5f};
  TextureMap metallic{1, 1, TextureSemantic::Metallic, 0.0f};
  TextureMap tangent_normal{1, 2, TextureSemantic::TangentNormalXY, 0.5f};

  int resolution() const { return albedo.resolution; }
  bool consistent() const;
  bool operator==(const MaterialTextureSet&) const = default;

  static MaterialTextureSet uniform(int resolution, const Vec3& albedo, double roughness,
                                    double metallic, const Vec2& tangent_normal = Vec2(0.5, 0.5));

  /// Same values, every texel copied from texel (0, 0) of a T = 1 source.
  MaterialTextureSet broadcast(int resolution) const;
  /// Box-average down to a single texel.
  MaterialTextureSet averaged() const;
};

/// Texture coordinate plus the local derivative of the (clamped) mapping.
struct TexCoord {
  double s = 0.5;
  double t = 0.5;
  double ds_du = 0.0;
  double dt_dv = 0.0;
};

/// (u, v) -> (s, t) over [-S, S]^2, then clamped to [h, 1 - h] with h = 0.5 / T.
TexCoord uv_to_st(double u, double v, const TextureConfig& cfg);

/// Texel corners and fractional weights for clamp-to-edge bilinear filtering
/// with texel centers at ((i + 0.5) / T, (j + 0.5) / T).
struct BilinearFootprint {
  int i0 = 0;
  int i1 = 0;
  int j0 = 0;
  int j1 = 0;
  double fx = 0.0;
  double fy = 0.0;

  /// Flat texel indices and weights in the order (i0,j0), (i1,j0), (i0,j1), (i1,j1).
  std::array<int, 4> texel_indices(int resolution) const {
    return {j0 * resolution + i0, j0 * resolution + i1, j1 * resolution + i0, j1 * resolution + i1};
  }
  std::array<double, 4> weights() const {
    return {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
  }
};

inline BilinearFootprint bilinear_footprint(double s, double t, int resolution) {
  BilinearFootprint fp;
  const double x = s * resolution - 0.5;
  const double y = t * resolution - 0.5;
  const double x0 = fast_floor(x);
  const double y0 = fast_floor(y);
  fp.fx = x - x0;
  fp.fy = y - y0;
  const int last = resolution - 1;
  fp.i0 = std::clamp(static_cast<int>(x0), 0, last);
  fp.i1 = std::clamp(static_cast<int>(x0) + 1, 0, last);
  fp.j0 = std::clamp(static_cast<int>(y0), 0, last);
  fp.j1 = std::clamp(static_cast<int>(y0) + 1, 0, last);
  return fp;
}

/// Two nested lerps; the shared arithmetic of every bilinear path.
inline double bilinear_combine(double t00, double t10, double t01, double t11,
                               const BilinearFootprint& fp) {
  return lerp(lerp(t00, t10, fp.fx), lerp(t01, t11, fp.fx), fp.fy);
}

using TexelValue = std::array<double, 4>;

TexelValue bilinear_sample(const TextureMap& tex, double s, double t);

struct BilinearGrad {
  std::array<int, 4> texel_index{};
  std::array<double, 4> weight{};
  double d_s = 0.0;
  double d_t = 0.0;

  /// Adds weight * upstream into a T*T*C gradient buffer laid out like the texels.
  void accumulate(std::span<double> grad_texels, int channels, const TexelValue& upstream) const;
};

BilinearGrad bilinear_sample_grad(const TextureMap& tex, double s, double t,
                                  const TexelValue& upstream);

struct MaterialSample {
  Vec3 albedo = Vec3::Constant(0.5);
  double roughness = 0.5;
  double metallic = 0.0;
  Vec2 tangent_normal = Vec2(0.5, 0.5);
};

MaterialSample sample_material(const MaterialTextureSet& set, double s, double t);

/// Stored [0,1]^2 channels -> unit tangent-space normal with n_z >= 0.
Vec3 decode_tangent_normal(double a, double b);
/// Gradient of decode_tangent_normal with respect to the stored channels.
Vec2 decode_tangent_normal_backward(double a, double b, const Vec3& upstream);

/// [t_u, t_v, t_u x t_v] * n_t.
Vec3 normal_to_world(const Splat& splat, const Vec3& tangent_normal);

} // namespace texsplat
