#pragma once

#include "texsplat/texture.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace texsplat {

inline constexpr int kDefaultAtlasMaxDim = 4096;

/// Page families. A holds albedo.rgb + roughness, B holds
/// tangent_normal.xy + metallic + an unused zero channel.
enum class AtlasFamily { AlbedoRoughness = 0, NormalMetallic = 1 };

std::array<std::string, 4> channel_assignment(AtlasFamily family);

/// One page of packed T x T charts, 4 interleaved channels per texel.
struct TextureAtlas {
  AtlasFamily family = AtlasFamily::AlbedoRoughness;
  int atlas_id = 0;
  int chart_size = 1;
  int charts_x = 1;
  int charts_y = 1;
  std::vector<float> texels;

  int width() const { return charts_x * chart_size; }
  int height() const { return charts_y * chart_size; }
  const float* texel(int x, int y) const {
    return texels.data() + (static_cast<std::size_t>(y) * width() + x) * 4;
  }
  float* texel(int x, int y) { return texels.data() + (static_cast<std::size_t>(y) * width() + x) * 4; }
  bool operator==(const TextureAtlas&) const = default;
};

struct IndirectionEntry {
  int chart_x = 0;
  int chart_y = 0;
  int page = 0;
  bool operator==(const IndirectionEntry&) const = default;
};

/// splat id -> chart slot, identical for both page families.
struct IndirectionBuffer {
  std::vector<IndirectionEntry> entries;

  /// Throws std::out_of_range for unknown ids.
  const IndirectionEntry& lookup(int splat_id) const;
  std::size_t size() const { return entries.size(); }
  bool operator==(const IndirectionBuffer&) const = default;
};

struct AtlasSet {
  int chart_size = 1;
  /// Capacity per page along each axis: floor(max_dim / T).
  int capacity_x = 1;
  int capacity_y = 1;
  std::vector<TextureAtlas> albedo_roughness;
  std::vector<TextureAtlas> normal_metallic;
  IndirectionBuffer indirection;

  std::size_t page_count() const { return albedo_roughness.size(); }
  const std::vector<TextureAtlas>& pages(AtlasFamily f) const {
    return f == AtlasFamily::AlbedoRoughness ? albedo_roughness : normal_metallic;
  }
  bool operator==(const AtlasSet&) const = default;
};

/// Row-major chart assignment in splat-id order. The last page keeps the
/// full width but only as many chart rows as it needs.
/// Throws std::invalid_argument on empty input, T > max_dim or mixed resolutions.
AtlasSet pack_atlases(std::span<const MaterialTextureSet> sets, int max_dim = kDefaultAtlasMaxDim);

/// Normalized atlas coordinates of local (s, t) inside chart (cx, cy).
Vec2 atlas_coords(int chart_x, int chart_y, double s, double t, int chart_size, int charts_x,
                  int charts_y);

/// Bilinear sample of one page family for splat `splat_id` at local (s, t).
/// The chart origin is applied in integer texel units and the fractional
/// footprint is computed exactly as the per-primitive sampler does, so the
/// result matches bilinear_sample on the source maps bit for bit.
TexelValue atlas_sample(const AtlasSet& atlases, AtlasFamily family, int splat_id, double s,
                        double t);

/// Both families at once with a single footprint.
MaterialSample sample_material_atlas(const AtlasSet& atlases, int splat_id, double s, double t);

/// Clamp-to-edge bilinear lookup on a page in normalized page coordinates.
TexelValue sample_page_normalized(const TextureAtlas& page, double s_atlas, double t_atlas);

} // namespace texsplat
