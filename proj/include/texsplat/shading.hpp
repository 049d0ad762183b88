#pragma once

#include "texsplat/brdf.hpp"
#include "texsplat/bvh.hpp"
#include "texsplat/environment.hpp"
#include "texsplat/gradients.hpp"
#include "texsplat/rasterizer.hpp"

namespace texsplat {

/// Material values of one pixel after de-premultiplying by accumulated alpha.
struct ResolvedPixel {
  Vec3 albedo = Vec3::Zero();
  double metallic = 0.0;
  double roughness = 0.0;
  Vec3 normal = Vec3::UnitZ();  // unit
  Vec3 indirect = Vec3::Zero();
  double depth = 0.0;
  double alpha = 0.0;

  bool covered() const { return alpha > 0.0; }
};

ResolvedPixel resolve_pixel(const GBuffer& g, std::size_t p);

/// Gradient with respect to the resolved values.
struct ResolvedGrad {
  Vec3 albedo = Vec3::Zero();
  double metallic = 0.0;
  double roughness = 0.0;
  Vec3 normal = Vec3::Zero();
  Vec3 indirect = Vec3::Zero();
  double depth = 0.0;
};

/// Pulls resolved-value gradients back to the blended channels and alpha of pixel p.
void resolve_backward(const GBuffer& g, std::size_t p, const ResolvedGrad& d, GBufferGrad& out);

struct ShadeResult {
  Vec3 radiance = Vec3::Zero();
  Vec3 diffuse = Vec3::Zero();
  Vec3 specular = Vec3::Zero();
  Vec3 reflected = Vec3::UnitZ();
  int visible = 1;
};

/// F0 = mix(0.04, albedo, metallic).
inline Vec3 base_reflectance(const Vec3& albedo, double metallic) {
  return Vec3::Constant(0.04 * (1.0 - metallic)) + albedo * metallic;
}

/// Split-sum shading of one resolved pixel seen along `outgoing` (unit,
/// surface to eye). With a mesh, visibility is traced from `point` along the
/// reflected direction; without one V = 1.
ShadeResult shade_pixel(const ResolvedPixel& px, const Vec3& outgoing, const EnvironmentLight& env,
                        const BrdfLut& lut, const VisibilityMesh* mesh = nullptr,
                        const Vec3& point = Vec3::Zero());

struct ShadeBackward {
  ResolvedGrad resolved;
  MapTaps diffuse_taps;
  Vec3 d_diffuse_map = Vec3::Zero();
  int level0 = 0;
  int level1 = 0;
  MapTaps taps0;
  MapTaps taps1;
  Vec3 d_level0 = Vec3::Zero();
  Vec3 d_level1 = Vec3::Zero();
};

/// Reverse of shade_pixel for dL/d radiance; `visible` is the forward V.
ShadeBackward shade_pixel_backward(const ResolvedPixel& px, const Vec3& outgoing,
                                   const EnvironmentLight& env, const BrdfLut& lut, int visible,
                                   const Vec3& d_radiance);

/// Scatters the lighting part of a shading gradient into the environment grids.
void accumulate_environment(const ShadeBackward& b, EnvironmentGrad& grad);

/// Per-splat indirect radiance along a reflected direction: SH, clamped at 0.
inline Vec3 eval_indirect(const Splat& splat, const Vec3& reflected) {
  return eval_sh_radiance(splat.indirect_sh, reflected);
}

} // namespace texsplat
