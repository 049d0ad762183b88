#include "texsplat/brdf.hpp"

#include "texsplat/parallel.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace texsplat {

namespace {

double radical_inverse(std::uint32_t bits) {
  bits = (bits << 16u) | (bits >> 16u);
  bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
  bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
  bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
  bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
  return bits * 2.3283064365386963e-10;
}

struct Azimuth {
  double c;
  double s;
};

Vec2 integrate_cell(double n_dot_v, double roughness, const std::vector<Azimuth>& azimuths) {
  const int samples = static_cast<int>(azimuths.size());
  const double alpha = roughness * roughness;
  const double a2 = alpha * alpha;
  const Vec3 v(std::sqrt(1.0 - n_dot_v * n_dot_v), 0.0, n_dot_v);
  double a = 0.0;
  double b = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double u1 = (k + 0.5) / samples;
    const double cos_h = std::sqrt((1.0 - u1) / (1.0 + (a2 - 1.0) * u1));
    const double sin_h = std::sqrt(std::max(0.0, 1.0 - cos_h * cos_h));
    const Vec3 h(sin_h * azimuths[k].c, sin_h * azimuths[k].s, cos_h);
    const double v_dot_h = v.dot(h);
    const Vec3 l = 2.0 * v_dot_h * h - v;
    const double n_dot_l = l.z();
    if (n_dot_l <= 0.0 || v_dot_h <= 0.0) {
      continue;
    }
    // BRDF * cos / pdf with pdf = D n.h / (4 v.h).
    const double g = 4.0 * smith_ggx_correlated_visibility(n_dot_v, n_dot_l, alpha) * n_dot_l *
                     v_dot_h / cos_h;
    const double w = 1.0 - v_dot_h;
    const double fc = w * w * w * w * w;
    a += (1.0 - fc) * g;
    b += fc * g;
  }
  return {clamp01(a / samples), clamp01(b / samples)};
}

} // namespace

BrdfLut precompute_brdf_lut(int resolution, int sample_count) {
  if (resolution < 16 || sample_count < 1024) {
    throw std::invalid_argument("precompute_brdf_lut: resolution >= 16 and samples >= 1024 required");
  }
  BrdfLut lut;
  lut.resolution = resolution;
  lut.scale.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);
  lut.bias.assign(lut.scale.size(), 0.0);
  std::vector<Azimuth> azimuths(static_cast<std::size_t>(sample_count));
  for (int k = 0; k < sample_count; ++k) {
    const double phi = 2.0 * kPi * radical_inverse(static_cast<std::uint32_t>(k));
    azimuths[k] = {std::cos(phi), std::sin(phi)};
  }
  parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < resolution; ++i) {
      const Vec2 ab = integrate_cell(lut.cell_n_dot_v(i), lut.cell_roughness(j), azimuths);
      lut.scale[row * resolution + i] = ab.x();
      lut.bias[row * resolution + i] = ab.y();
    }
  });
  return lut;
}

BrdfLut::Sample BrdfLut::lookup(double n_dot_v, double roughness) const {
  const int res = resolution;
  const double x = clamp01(n_dot_v) * res - 0.5;
  const double y = clamp01(roughness) * res - 0.5;
  const double xc = std::clamp(x, 0.0, res - 1.0);
  const double yc = std::clamp(y, 0.0, res - 1.0);
  const int i0 = std::min(static_cast<int>(xc), res - 1);
  const int j0 = std::min(static_cast<int>(yc), res - 1);
  const int i1 = std::min(i0 + 1, res - 1);
  const int j1 = std::min(j0 + 1, res - 1);
  const double fx = xc - i0;
  const double fy = yc - j0;
  const bool live_x = x > 0.0 && x < res - 1.0 && n_dot_v > 0.0 && n_dot_v < 1.0;
  const bool live_y = y > 0.0 && y < res - 1.0 && roughness > 0.0 && roughness < 1.0;

  auto eval = [&](const std::vector<double>& t, double& value, double& d_nv, double& d_r) {
    const double t00 = t[j0 * res + i0];
    const double t10 = t[j0 * res + i1];
    const double t01 = t[j1 * res + i0];
    const double t11 = t[j1 * res + i1];
    value = lerp(lerp(t00, t10, fx), lerp(t01, t11, fx), fy);
    d_nv = live_x ? ((1.0 - fy) * (t10 - t00) + fy * (t11 - t01)) * res : 0.0;
    d_r = live_y ? ((1.0 - fx) * (t01 - t00) + fx * (t11 - t10)) * res : 0.0;
  };
  Sample s;
  eval(scale, s.scale, s.d_scale_d_nv, s.d_scale_d_r);
  eval(bias, s.bias, s.d_bias_d_nv, s.d_bias_d_r);
  return s;
}

const BrdfLut& default_brdf_lut() {
  static const BrdfLut lut = precompute_brdf_lut();
  return lut;
}

} // namespace texsplat
