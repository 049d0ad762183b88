#include "texsplat/render.hpp"

#include "texsplat/parallel.hpp"

namespace texsplat {

Vec3 pixel_outgoing(const Camera& camera, int px, int py) {
  return -camera.ray_direction(camera.pixel_to_plane(px, py)).normalized();
}

Vec3 pixel_point(const Camera& camera, int px, int py, double depth) {
  return camera.center() + depth * camera.ray_direction(camera.pixel_to_plane(px, py));
}

namespace {

const BrdfLut& lut_of(const RenderSettings& s) {
  return s.lut != nullptr ? *s.lut : default_brdf_lut();
}

} // namespace

RenderOutput render(const Scene& scene, const Camera& camera, const RenderSettings& settings) {
  RenderOutput out;
  out.order = sort_and_cull(scene, camera);
  out.gbuffer = splat_attributes(scene, camera, out.order, settings.raster);
  const int w = camera.width;
  const int h = camera.height;
  out.color = Image(w, h, 3);
  out.diffuse = Image(w, h, 3);
  out.specular = Image(w, h, 3);
  out.radiance = Image(w, h, 3);
  out.visible.assign(static_cast<std::size_t>(w) * h, 1);
  const BrdfLut& lut = lut_of(settings);
  const VisibilityMesh* mesh = settings.use_visibility ? scene.mesh.get() : nullptr;
  parallel_for(
      static_cast<std::size_t>(h),
      [&](std::size_t row) {
        const int py = static_cast<int>(row);
        for (int px = 0; px < w; ++px) {
          const std::size_t p = row * w + px;
          const ResolvedPixel r = resolve_pixel(out.gbuffer, p);
          if (!r.covered()) {
            out.color.set_rgb(px, py, scene.background);
            continue;
          }
          const ShadeResult s = shade_pixel(r, pixel_outgoing(camera, px, py), scene.environment,
                                            lut, mesh, pixel_point(camera, px, py, r.depth));
          out.visible[p] = s.visible;
          out.radiance.set_rgb(px, py, s.radiance);
          out.color.set_rgb(px, py, r.alpha * s.radiance + (1.0 - r.alpha) * scene.background);
          out.diffuse.set_rgb(px, py, r.alpha * s.diffuse);
          out.specular.set_rgb(px, py, r.alpha * s.specular);
        }
      },
      settings.raster.threads);
  return out;
}

void render_backward(const Scene& scene, const Camera& camera, const RenderOutput& fwd,
                     const RenderUpstream& up, SceneGradients& grads,
                     const RenderSettings& settings) {
  const int w = camera.width;
  const int h = camera.height;
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  const BrdfLut& lut = lut_of(settings);
  GBufferGrad gg(pixels);
  std::vector<ShadeBackward> shade(pixels);
  std::vector<char> shaded(pixels, 0);
  const bool has_color = !up.d_color.data.empty();
  const bool has_normal = !up.d_normal.data.empty();
  const bool has_depth = !up.d_depth.data.empty();

  parallel_for(
      static_cast<std::size_t>(h),
      [&](std::size_t row) {
        const int py = static_cast<int>(row);
        for (int px = 0; px < w; ++px) {
          const std::size_t p = row * w + px;
          const ResolvedPixel r = resolve_pixel(fwd.gbuffer, p);
          if (!r.covered()) {
            continue;
          }
          ResolvedGrad d;
          if (has_color) {
            const Vec3 dc = up.d_color.rgb(px, py);
            if (!dc.isZero(0.0)) {
              gg.alpha[p] += dc.dot(fwd.radiance.rgb(px, py) - scene.background);
              shade[p] = shade_pixel_backward(r, pixel_outgoing(camera, px, py), scene.environment,
                                              lut, fwd.visible[p], r.alpha * dc);
              shaded[p] = 1;
              d = shade[p].resolved;
            }
          }
          if (has_normal) {
            d.normal += up.d_normal.rgb(px, py);
          }
          if (has_depth) {
            d.depth += up.d_depth.data[p];
          }
          resolve_backward(fwd.gbuffer, p, d, gg);
        }
      },
      settings.raster.threads);

  if (scene.environment.learnable) {
    for (std::size_t p = 0; p < pixels; ++p) {
      if (shaded[p]) {
        accumulate_environment(shade[p], grads.environment);
      }
    }
  }
  splat_backward(scene, camera, fwd.order, gg, grads, settings.raster.threads);
}

} // namespace texsplat
