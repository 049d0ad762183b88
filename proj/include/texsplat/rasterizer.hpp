#pragma once

#include "texsplat/atlas.hpp"
#include "texsplat/image.hpp"
#include "texsplat/scene.hpp"

#include <array>
#include <vector>

namespace texsplat {

inline constexpr double kTransmittanceEpsilon = 1e-4;
inline constexpr int kTileSize = 16;

/// Blended G-buffer channels.
namespace gb {
inline constexpr int kAlbedo = 0;
inline constexpr int kMetallic = 3;
inline constexpr int kRoughness = 4;
inline constexpr int kNormal = 5;
inline constexpr int kIndirect = 8;
inline constexpr int kDepth = 11;
inline constexpr int kChannels = 12;
} // namespace gb

using Attributes = std::array<double, gb::kChannels>;

/// Per pixel: alpha-weighted sums of the fragment attributes (composited
/// onto zero) and the accumulated alpha.
struct GBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  std::vector<double> alpha;

  GBuffer() = default;
  GBuffer(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * gb::kChannels, 0.0),
        alpha(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t pixel_count() const { return alpha.size(); }
  const double* pixel(std::size_t p) const { return &data[p * gb::kChannels]; }
  double* pixel(std::size_t p) { return &data[p * gb::kChannels]; }
  Vec3 albedo(std::size_t p) const { return Vec3(pixel(p) + gb::kAlbedo); }
  double metallic(std::size_t p) const { return pixel(p)[gb::kMetallic]; }
  double roughness(std::size_t p) const { return pixel(p)[gb::kRoughness]; }
  Vec3 normal(std::size_t p) const { return Vec3(pixel(p) + gb::kNormal); }
  Vec3 indirect(std::size_t p) const { return Vec3(pixel(p) + gb::kIndirect); }
  double depth(std::size_t p) const { return pixel(p)[gb::kDepth]; }
  bool operator==(const GBuffer&) const = default;
};

/// Where fragment materials come from.
enum class MaterialMode {
  /// Bilinear sampling of each splat's own texture maps.
  PerPrimitive,
  /// Bilinear sampling through packed atlas pages.
  Atlas,
  /// Texel (0, 0) of each map, no filtering: the untextured baseline.
  Scalar,
};

struct RasterOptions {
  MaterialMode material = MaterialMode::PerPrimitive;
  const AtlasSet* atlas = nullptr;
  int threads = 0;
};

/// Per-splat view-dependent data shared by the forward and backward passes.
struct SplatView {
  Vec3 a = Vec3::Zero();  // W s_u t_u
  Vec3 b = Vec3::Zero();  // W s_v t_v
  Vec3 d = Vec3::Zero();  // W p
  double depth = 0.0;     // view-space depth of the center
  double flip = 1.0;      // +1 when t_u x t_v faces the camera
  Vec3 reflect = Vec3::UnitZ();
  Vec3 indirect = Vec3::Zero();
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive pixel rectangle
};

struct DrawOrder {
  std::vector<int> indices;
  std::vector<SplatView> views;  // indexed by splat index
};

/// Frame, screen rectangle and per-splat reflection / indirect radiance.
SplatView compute_splat_view(const Splat& splat, const Camera& camera);

/// Splats whose cutoff-radius disk reaches the viewport, sorted by center
/// depth with ties broken by index.
DrawOrder sort_and_cull(const Scene& scene, const Camera& camera);

GBuffer splat_attributes(const Scene& scene, const Camera& camera, const DrawOrder& order,
                         const RasterOptions& opts = {});

/// dL/d(blended channels) and dL/d(accumulated alpha).
struct GBufferGrad {
  std::vector<double> data;
  std::vector<double> alpha;

  GBufferGrad() = default;
  explicit GBufferGrad(std::size_t pixels)
      : data(pixels * gb::kChannels, 0.0), alpha(pixels, 0.0) {}
};

/// Contributing fragments of one view: the number of material samples a
/// G-buffer pass takes.
std::size_t count_fragments(const Scene& scene, const Camera& camera, const DrawOrder& order);

struct SceneGradients;

/// Reverse pass of splat_attributes with per-pixel fragment recomputation.
/// Accumulates into `grads`, which must be shaped for the scene. Always
/// samples the per-primitive maps (the atlas path is value-identical).
void splat_backward(const Scene& scene, const Camera& camera, const DrawOrder& order,
                    const GBufferGrad& upstream, SceneGradients& grads, int threads = 0);

/// Export threshold for the normal map.
inline constexpr double kNormalAlphaThreshold = 0.5;

/// View-space normals (x right, y up, z toward the viewer) encoded
/// (n + 1) / 2 where A > 0.5, (0.5, 0.5, 0.5) elsewhere.
Image render_normal_map(const GBuffer& g, const Camera& camera);
/// De-premultiplied view depth; 0 where uncovered.
Image render_depth_map(const GBuffer& g);

} // namespace texsplat
