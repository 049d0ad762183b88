#include "texsplat/atlas.hpp"

#include <stdexcept>

namespace texsplat {

std::array<std::string, 4> channel_assignment(AtlasFamily family) {
  if (family == AtlasFamily::AlbedoRoughness) {
    return {"albedo.r", "albedo.g", "albedo.b", "roughness"};
  }
  return {"tangent_normal.x", "tangent_normal.y", "metallic", "unused"};
}

const IndirectionEntry& IndirectionBuffer::lookup(int splat_id) const {
  if (splat_id < 0 || static_cast<std::size_t>(splat_id) >= entries.size()) {
    throw std::out_of_range("indirection lookup: unknown splat id " + std::to_string(splat_id));
  }
  return entries[splat_id];
}

namespace {

void write_chart(TextureAtlas& page, const IndirectionEntry& slot, const MaterialTextureSet& set) {
  const int res = page.chart_size;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      float* dst = page.texel(slot.chart_x * res + i, slot.chart_y * res + j);
      if (page.family == AtlasFamily::AlbedoRoughness) {
        dst[0] = set.albedo.at(i, j, 0);
        dst[1] = set.albedo.at(i, j, 1);
        dst[2] = set.albedo.at(i, j, 2);
        dst[3] = set.roughness.at(i, j, 0);
      } else {
        dst[0] = set.tangent_normal.at(i, j, 0);
        dst[1] = set.tangent_normal.at(i, j, 1);
        dst[2] = set.metallic.at(i, j, 0);
        dst[3] = 0.0f;
      }
    }
  }
}

} // namespace

AtlasSet pack_atlases(std::span<const MaterialTextureSet> sets, int max_dim) {
  if (sets.empty()) {
    throw std::invalid_argument("pack_atlases: no texture sets");
  }
  const int res = sets.front().resolution();
  if (res > max_dim) {
    throw std::invalid_argument("pack_atlases: texture resolution exceeds atlas max dimension");
  }
  for (const auto& set : sets) {
    if (!set.consistent() || set.resolution() != res) {
      throw std::invalid_argument("pack_atlases: texture sets must share one resolution");
    }
  }

  AtlasSet out;
  out.chart_size = res;
  out.capacity_x = max_dim / res;
  out.capacity_y = max_dim / res;
  const std::size_t per_page = static_cast<std::size_t>(out.capacity_x) * out.capacity_y;
  const std::size_t count = sets.size();
  const std::size_t pages = (count + per_page - 1) / per_page;

  out.indirection.entries.resize(count);
  for (std::size_t id = 0; id < count; ++id) {
    const std::size_t slot = id % per_page;
    out.indirection.entries[id] = {static_cast<int>(slot % out.capacity_x),
                                   static_cast<int>(slot / out.capacity_x),
                                   static_cast<int>(id / per_page)};
  }

  for (AtlasFamily family : {AtlasFamily::AlbedoRoughness, AtlasFamily::NormalMetallic}) {
    auto& dst = family == AtlasFamily::AlbedoRoughness ? out.albedo_roughness : out.normal_metallic;
    for (std::size_t p = 0; p < pages; ++p) {
      const std::size_t used = std::min(per_page, count - p * per_page);
      TextureAtlas page;
      page.family = family;
      page.atlas_id = static_cast<int>(p);
      page.chart_size = res;
      page.charts_x = out.capacity_x;
      page.charts_y = static_cast<int>((used + out.capacity_x - 1) / out.capacity_x);
      page.texels.assign(static_cast<std::size_t>(page.width()) * page.height() * 4, 0.0f);
      dst.push_back(std::move(page));
    }
    for (std::size_t id = 0; id < count; ++id) {
      const auto& slot = out.indirection.entries[id];
      write_chart(dst[slot.page], slot, sets[id]);
    }
  }
  return out;
}

Vec2 atlas_coords(int chart_x, int chart_y, double s, double t, int chart_size, int charts_x,
                  int charts_y) {
  return {(chart_x * chart_size + s * chart_size) / (charts_x * chart_size),
          (chart_y * chart_size + t * chart_size) / (charts_y * chart_size)};
}

namespace {

struct AtlasFootprint {
  BilinearFootprint local;
  std::array<std::size_t, 4> offset;
};

AtlasFootprint atlas_footprint(const TextureAtlas& page, const IndirectionEntry& slot, double s,
                               double t) {
  AtlasFootprint fp;
  fp.local = bilinear_footprint(s, t, page.chart_size);
  const int ox = slot.chart_x * page.chart_size;
  const int oy = slot.chart_y * page.chart_size;
  const std::size_t w = page.width();
  auto at = [&](int i, int j) { return ((static_cast<std::size_t>(oy + j)) * w + (ox + i)) * 4; };
  fp.offset = {at(fp.local.i0, fp.local.j0), at(fp.local.i1, fp.local.j0),
               at(fp.local.i0, fp.local.j1), at(fp.local.i1, fp.local.j1)};
  return fp;
}

TexelValue combine(const TextureAtlas& page, const AtlasFootprint& fp) {
  const float* base = page.texels.data();
  TexelValue out{};
  for (int c = 0; c < 4; ++c) {
    out[c] = bilinear_combine(base[fp.offset[0] + c], base[fp.offset[1] + c],
                              base[fp.offset[2] + c], base[fp.offset[3] + c], fp.local);
  }
  return out;
}

} // namespace

TexelValue atlas_sample(const AtlasSet& atlases, AtlasFamily family, int splat_id, double s,
                        double t) {
  const IndirectionEntry& slot = atlases.indirection.lookup(splat_id);
  const TextureAtlas& page = atlases.pages(family)[slot.page];
  return combine(page, atlas_footprint(page, slot, s, t));
}

MaterialSample sample_material_atlas(const AtlasSet& atlases, int splat_id, double s, double t) {
  const IndirectionEntry& slot = atlases.indirection.lookup(splat_id);
  const TextureAtlas& page_a = atlases.albedo_roughness[slot.page];
  const TextureAtlas& page_b = atlases.normal_metallic[slot.page];
  // Both families share geometry, so one footprint addresses both pages.
  const AtlasFootprint fp = atlas_footprint(page_a, slot, s, t);
  const TexelValue a = combine(page_a, fp);
  const TexelValue b = combine(page_b, fp);
  return {Vec3(a[0], a[1], a[2]), a[3], b[2], Vec2(b[0], b[1])};
}

TexelValue sample_page_normalized(const TextureAtlas& page, double s_atlas, double t_atlas) {
  const int w = page.width();
  const int h = page.height();
  const double x = s_atlas * w - 0.5;
  const double y = t_atlas * h - 0.5;
  const double x0 = fast_floor(x);
  const double y0 = fast_floor(y);
  BilinearFootprint fp;
  fp.fx = x - x0;
  fp.fy = y - y0;
  fp.i0 = std::clamp(static_cast<int>(x0), 0, w - 1);
  fp.i1 = std::clamp(static_cast<int>(x0) + 1, 0, w - 1);
  fp.j0 = std::clamp(static_cast<int>(y0), 0, h - 1);
  fp.j1 = std::clamp(static_cast<int>(y0) + 1, 0, h - 1);
  TexelValue out{};
  for (int c = 0; c < 4; ++c) {
    out[c] = bilinear_combine(page.texel(fp.i0, fp.j0)[c], page.texel(fp.i1, fp.j0)[c],
                              page.texel(fp.i0, fp.j1)[c], page.texel(fp.i1, fp.j1)[c], fp);
  }
  return out;
}

} // namespace texsplat
