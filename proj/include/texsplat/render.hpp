#pragma once

#include "texsplat/gradients.hpp"
#include "texsplat/rasterizer.hpp"
#include "texsplat/shading.hpp"

namespace texsplat {

struct RenderSettings {
  RasterOptions raster;
  /// Trace the scene's visibility mesh when present.
  bool use_visibility = true;
  /// Defaults to default_brdf_lut().
  const BrdfLut* lut = nullptr;
};

struct RenderOutput {
  DrawOrder order;
  GBuffer gbuffer;
  Image color;     // A L_o + (1 - A) background
  Image diffuse;   // A L_d
  Image specular;  // A L_s
  Image radiance;  // L_o, zero where uncovered
  std::vector<int> visible;
};

/// Sort, splat and deferred-shade one view.
RenderOutput render(const Scene& scene, const Camera& camera, const RenderSettings& settings = {});

/// Image-space gradients fed into render_backward. Empty images are skipped.
struct RenderUpstream {
  Image d_color;   // 3 channels
  Image d_normal;  // 3 channels, w.r.t. the resolved unit world normal
  Image d_depth;   // 1 channel, w.r.t. the resolved depth
};

/// Accumulates dL/d(scene) into `grads`.
void render_backward(const Scene& scene, const Camera& camera, const RenderOutput& fwd,
                     const RenderUpstream& upstream, SceneGradients& grads,
                     const RenderSettings& settings = {});

/// Unit world direction from the surface toward the eye for pixel p.
Vec3 pixel_outgoing(const Camera& camera, int px, int py);
/// World position at view depth `depth` along the pixel ray.
Vec3 pixel_point(const Camera& camera, int px, int py, double depth);

} // namespace texsplat
