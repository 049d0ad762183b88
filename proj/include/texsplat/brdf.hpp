#pragma once

#include "texsplat/math.hpp"

#include <vector>

namespace texsplat {

/// GGX / Trowbridge-Reitz normal distribution, alpha = roughness^2.
inline double ggx_distribution(double n_dot_h, double alpha) {
  const double a2 = alpha * alpha;
  const double d = n_dot_h * n_dot_h * (a2 - 1.0) + 1.0;
  return a2 / (kPi * d * d);
}

/// Height-correlated Smith visibility G2 / (4 n.v n.l).
inline double smith_ggx_correlated_visibility(double n_dot_v, double n_dot_l, double alpha) {
  const double a2 = alpha * alpha;
  const double gv = n_dot_l * std::sqrt(n_dot_v * n_dot_v * (1.0 - a2) + a2);
  const double gl = n_dot_v * std::sqrt(n_dot_l * n_dot_l * (1.0 - a2) + a2);
  return 0.5 / (gv + gl);
}

inline constexpr int kDefaultLutResolution = 64;
inline constexpr int kDefaultLutSamples = 4096;

/// Split-sum scale/bias table: specular reflectance ~ F0 * A + B.
/// Cell (i, j) sits at n.v = (i + 0.5) / res, roughness = (j + 0.5) / res.
struct BrdfLut {
  int resolution = kDefaultLutResolution;
  std::vector<double> scale;
  std::vector<double> bias;

  double cell_n_dot_v(int i) const { return (i + 0.5) / resolution; }
  double cell_roughness(int j) const { return (j + 0.5) / resolution; }
  Vec2 cell(int i, int j) const {
    const std::size_t k = static_cast<std::size_t>(j) * resolution + i;
    return {scale[k], bias[k]};
  }

  struct Sample {
    double scale = 0.0;
    double bias = 0.0;
    double d_scale_d_nv = 0.0;
    double d_scale_d_r = 0.0;
    double d_bias_d_nv = 0.0;
    double d_bias_d_r = 0.0;
  };

  /// Clamp-to-edge bilinear lookup with partials in both coordinates.
  Sample lookup(double n_dot_v, double roughness) const;
};

/// Integrates (A, B) per cell with `sample_count` Hammersley points that
/// importance-sample the GGX half vector. Deterministic.
BrdfLut precompute_brdf_lut(int resolution = kDefaultLutResolution,
                            int sample_count = kDefaultLutSamples);

/// Shared, lazily built default table.
const BrdfLut& default_brdf_lut();

} // namespace texsplat
