#include "texsplat/rasterizer.hpp"

#include "texsplat/gradients.hpp"
#include "texsplat/parallel.hpp"

#include <numeric>

namespace texsplat {

SplatView compute_splat_view(const Splat& splat, const Camera& camera) {
  SplatView view;
  const Mat3 rot = camera.rotation();
  view.a = rot * (splat.scale_u * splat.tangent_u);
  view.b = rot * (splat.scale_v * splat.tangent_v);
  view.d = rot * splat.position + camera.translation();
  view.depth = view.d.z();

  const Vec3 center = camera.center();
  const Vec3 n = splat.tangent_u.cross(splat.tangent_v);
  const Vec3 to_camera = center - splat.position;
  view.flip = n.dot(to_camera) >= 0.0 ? 1.0 : -1.0;
  const Vec3 outgoing = to_camera.normalized();
  view.reflect = reflect_dir(outgoing, view.flip * n.normalized());
  view.indirect = eval_sh_radiance(splat.indirect_sh, view.reflect);

  const double r = cutoff_radius(splat.opacity);
  if (r <= 0.0) {
    return view;
  }
  std::array<Vec3, 4> corners = {view.d + r * view.a + r * view.b, view.d + r * view.a - r * view.b,
                                 view.d - r * view.a + r * view.b, view.d - r * view.a - r * view.b};
  int in_front = 0;
  for (const Vec3& c : corners) {
    in_front += c.z() > camera.near_plane ? 1 : 0;
  }
  if (in_front == 0) {
    return view;
  }
  double xmin = 0.0, xmax = camera.width - 1.0, ymin = 0.0, ymax = camera.height - 1.0;
  if (in_front == 4) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const Vec3& c : corners) {
      const double px = camera.fx * c.x() / c.z() + camera.cx - 0.5;
      const double py = camera.fy * c.y() / c.z() + camera.cy - 0.5;
      xmin = std::min(xmin, px);
      xmax = std::max(xmax, px);
      ymin = std::min(ymin, py);
      ymax = std::max(ymax, py);
    }
  }
  if (xmax < 0.0 || ymax < 0.0 || xmin > camera.width - 1.0 || ymin > camera.height - 1.0) {
    return view;
  }
  view.x0 = std::max(0, static_cast<int>(std::floor(xmin)));
  view.y0 = std::max(0, static_cast<int>(std::floor(ymin)));
  view.x1 = std::min(camera.width - 1, static_cast<int>(std::ceil(xmax)));
  view.y1 = std::min(camera.height - 1, static_cast<int>(std::ceil(ymax)));
  return view;
}

DrawOrder sort_and_cull(const Scene& scene, const Camera& camera) {
  DrawOrder order;
  order.views.resize(scene.splats.size());
  for (std::size_t i = 0; i < scene.splats.size(); ++i) {
    order.views[i] = compute_splat_view(scene.splats[i], camera);
    if (order.views[i].x1 >= order.views[i].x0 && order.views[i].y1 >= order.views[i].y0) {
      order.indices.push_back(static_cast<int>(i));
    }
  }
  std::sort(order.indices.begin(), order.indices.end(), [&](int l, int r) {
    const double dl = order.views[l].depth;
    const double dr = order.views[r].depth;
    return dl != dr ? dl < dr : l < r;
  });
  return order;
}

namespace {

struct TileGrid {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> lists;  // splat indices in draw order
};

TileGrid bin_tiles(const Camera& camera, const DrawOrder& order) {
  TileGrid grid;
  grid.tiles_x = (camera.width + kTileSize - 1) / kTileSize;
  grid.tiles_y = (camera.height + kTileSize - 1) / kTileSize;
  grid.lists.resize(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);
  for (int k : order.indices) {
    const SplatView& v = order.views[k];
    for (int ty = v.y0 / kTileSize; ty <= v.y1 / kTileSize; ++ty) {
      for (int tx = v.x0 / kTileSize; tx <= v.x1 / kTileSize; ++tx) {
        grid.lists[static_cast<std::size_t>(ty) * grid.tiles_x + tx].push_back(k);
      }
    }
  }
  return grid;
}

TextureConfig effective_config(const Scene& scene) {
  TextureConfig cfg = scene.texture_config;
  cfg.resolution = scene.texture_resolution();
  return cfg;
}

// One contributing fragment of a pixel.
struct Fragment {
  int splat = 0;
  IntersectionFrame frame;
  TexCoord tc;
  double gauss = 0.0;
  double alpha = 0.0;
  double transmittance = 1.0;
  Vec3 tangent_normal = Vec3::UnitZ();  // decoded, tangent space
  Vec2 stored_normal = Vec2(0.5, 0.5);
  Attributes x{};
};

MaterialSample fetch_material(const Scene& scene, const Splat& splat, const TexCoord& tc,
                              const RasterOptions& opts) {
  switch (opts.material) {
    case MaterialMode::Atlas:
      return sample_material_atlas(*opts.atlas, splat.texture_id, tc.s, tc.t);
    case MaterialMode::Scalar: {
      const MaterialTextureSet& set = scene.textures[splat.texture_id];
      return {Vec3(set.albedo.texels[0], set.albedo.texels[1], set.albedo.texels[2]),
              set.roughness.texels[0], set.metallic.texels[0],
              Vec2(set.tangent_normal.texels[0], set.tangent_normal.texels[1])};
    }
    case MaterialMode::PerPrimitive:
      break;
  }
  return sample_material(scene.textures[splat.texture_id], tc.s, tc.t);
}

// Intersects and evaluates one splat at a pixel; false when it does not contribute.
bool eval_fragment(const Scene& scene, const SplatView& view, int k, const Vec2& plane,
                   const Camera& camera, const TextureConfig& cfg, const RasterOptions& opts,
                   Fragment& f) {
  f.frame = intersect_columns(view.a, view.b, view.d, plane.x(), plane.y(), camera.near_plane);
  if (!f.frame.valid) {
    return false;
  }
  const Splat& splat = scene.splats[k];
  f.gauss = gaussian_weight(f.frame.u, f.frame.v);
  f.alpha = splat.opacity * f.gauss;
  if (f.alpha < kAlphaCutoff) {
    return false;
  }
  f.splat = k;
  f.tc = uv_to_st(f.frame.u, f.frame.v, cfg);
  const MaterialSample m = fetch_material(scene, splat, f.tc, opts);
  f.stored_normal = m.tangent_normal;
  f.tangent_normal = decode_tangent_normal(m.tangent_normal.x(), m.tangent_normal.y());
  const Vec3 n = view.flip * normal_to_world(splat, f.tangent_normal);
  f.x[gb::kAlbedo + 0] = m.albedo[0];
  f.x[gb::kAlbedo + 1] = m.albedo[1];
  f.x[gb::kAlbedo + 2] = m.albedo[2];
  f.x[gb::kMetallic] = m.metallic;
  f.x[gb::kRoughness] = m.roughness;
  for (int c = 0; c < 3; ++c) {
    f.x[gb::kNormal + c] = n[c];
    f.x[gb::kIndirect + c] = view.indirect[c];
  }
  f.x[gb::kDepth] = f.frame.z;
  return true;
}

// Front-to-back walk over a tile list for one pixel. Calls `emit` for each
// contributing fragment with its incoming transmittance filled in.
template <typename Emit>
void walk_pixel(const Scene& scene, const Camera& camera, const DrawOrder& order,
                const std::vector<int>& list, int px, int py, const TextureConfig& cfg,
                const RasterOptions& opts, Emit&& emit) {
  const Vec2 plane = camera.pixel_to_plane(px, py);
  double transmittance = 1.0;
  Fragment f;
  for (int k : list) {
    const SplatView& view = order.views[k];
    if (px < view.x0 || px > view.x1 || py < view.y0 || py > view.y1) {
      continue;
    }
    if (!eval_fragment(scene, view, k, plane, camera, cfg, opts, f)) {
      continue;
    }
    f.transmittance = transmittance;
    emit(f);
    transmittance *= 1.0 - f.alpha;
    if (transmittance < kTransmittanceEpsilon) {
      break;
    }
  }
}

template <typename Body>
void for_each_tile_pixel(const Camera& camera, const TileGrid& grid, std::size_t tile, Body&& body) {
  const int tx = static_cast<int>(tile % grid.tiles_x);
  const int ty = static_cast<int>(tile / grid.tiles_x);
  const int x_end = std::min(camera.width, (tx + 1) * kTileSize);
  const int y_end = std::min(camera.height, (ty + 1) * kTileSize);
  for (int py = ty * kTileSize; py < y_end; ++py) {
    for (int px = tx * kTileSize; px < x_end; ++px) {
      body(px, py);
    }
  }
}

} // namespace

std::size_t count_fragments(const Scene& scene, const Camera& camera, const DrawOrder& order) {
  const TileGrid grid = bin_tiles(camera, order);
  const TextureConfig cfg = effective_config(scene);
  const RasterOptions opts{MaterialMode::Scalar, nullptr, 1};
  std::size_t n = 0;
  for (std::size_t tile = 0; tile < grid.lists.size(); ++tile) {
    for_each_tile_pixel(camera, grid, tile, [&](int px, int py) {
      walk_pixel(scene, camera, order, grid.lists[tile], px, py, cfg, opts,
                 [&](const Fragment&) { ++n; });
    });
  }
  return n;
}

GBuffer splat_attributes(const Scene& scene, const Camera& camera, const DrawOrder& order,
                         const RasterOptions& opts) {
  GBuffer g(camera.width, camera.height);
  if (opts.material == MaterialMode::Atlas && opts.atlas == nullptr) {
    throw std::invalid_argument("splat_attributes: atlas mode needs packed atlases");
  }
  const TileGrid grid = bin_tiles(camera, order);
  const TextureConfig cfg = effective_config(scene);
  parallel_for(
      grid.lists.size(),
      [&](std::size_t tile) {
        const auto& list = grid.lists[tile];
        if (list.empty()) {
          return;
        }
        for_each_tile_pixel(camera, grid, tile, [&](int px, int py) {
          const std::size_t p = static_cast<std::size_t>(py) * g.width + px;
          double* out = g.pixel(p);
          double acc_alpha = 0.0;
          walk_pixel(scene, camera, order, list, px, py, cfg, opts, [&](const Fragment& f) {
            const double w = f.alpha * f.transmittance;
            for (int c = 0; c < gb::kChannels; ++c) {
              out[c] += w * f.x[c];
            }
            acc_alpha += w;
          });
          g.alpha[p] = acc_alpha;
        });
      },
      opts.threads);
  return g;
}

namespace {

// Gradient block of one splat inside one tile.
struct LocalGrad {
  Vec3 da = Vec3::Zero();
  Vec3 db = Vec3::Zero();
  Vec3 dd = Vec3::Zero();
  double opacity = 0.0;
  Vec3 indirect = Vec3::Zero();
  Vec3 tangent_u = Vec3::Zero();
  Vec3 tangent_v = Vec3::Zero();
  std::vector<double> texels;  // albedo | roughness | metallic | tangent normal
};

struct TileGrad {
  std::vector<int> splats;       // distinct splats, first-touch order within the tile
  std::vector<LocalGrad> blocks;
};

void intersection_backward(const IntersectionFrame& f, double x, double y, double du, double dv,
                           LocalGrad& g) {
  const Vec4& hu = f.h_u;
  const Vec4& hv = f.h_v;
  const double den = hu[0] * hv[1] - hu[1] * hv[0];
  const double u = f.u;
  const double v = f.v;
  const double g_hu1 = (du * (-u * hv[1]) + dv * (-hv[3] - v * hv[1])) / den;
  const double g_hu2 = (du * (hv[3] + u * hv[0]) + dv * (v * hv[0])) / den;
  const double g_hu4 = (du * (-hv[1]) + dv * hv[0]) / den;
  const double g_hv1 = (du * (u * hu[1]) + dv * (hu[3] + v * hu[1])) / den;
  const double g_hv2 = (du * (-hu[3] - u * hu[0]) + dv * (-v * hu[0])) / den;
  const double g_hv4 = (du * hu[1] + dv * (-hu[0])) / den;
  // h_u = (x a_z - a_x, x b_z - b_x, 0, x d_z - d_x), h_v likewise with y.
  g.da += Vec3(-g_hu1, -g_hv1, x * g_hu1 + y * g_hv1);
  g.db += Vec3(-g_hu2, -g_hv2, x * g_hu2 + y * g_hv2);
  g.dd += Vec3(-g_hu4, -g_hv4, x * g_hu4 + y * g_hv4);
}

// Accumulates texel gradients of one map into `dst` and returns (d_s, d_t).
Vec2 map_backward(const TextureMap& map, const BilinearFootprint& fp, const double* upstream,
                  double* dst) {
  const int res = map.resolution;
  const int ch = map.channels;
  const auto idx = fp.texel_indices(res);
  const auto w = fp.weights();
  Vec2 dst_st = Vec2::Zero();
  for (int c = 0; c < ch; ++c) {
    const double up = upstream[c];
    if (up == 0.0) {
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      dst[idx[k] * ch + c] += w[k] * up;
    }
    const double t00 = map.texels[idx[0] * ch + c];
    const double t10 = map.texels[idx[1] * ch + c];
    const double t01 = map.texels[idx[2] * ch + c];
    const double t11 = map.texels[idx[3] * ch + c];
    dst_st.x() += up * ((1.0 - fp.fy) * (t10 - t00) + fp.fy * (t11 - t01)) * res;
    dst_st.y() += up * ((1.0 - fp.fx) * (t01 - t00) + fp.fx * (t11 - t10)) * res;
  }
  return dst_st;
}

void fragment_backward(const Scene& scene, const SplatView& view, const Fragment& f,
                       const Vec2& plane, double d_alpha, const Attributes& dx, LocalGrad& g) {
  const Splat& splat = scene.splats[f.splat];
  const MaterialTextureSet& set = scene.textures[splat.texture_id];
  const int texels = set.resolution() * set.resolution();

  g.opacity += d_alpha * f.gauss;
  double du = -d_alpha * f.alpha * f.frame.u;
  double dv = -d_alpha * f.alpha * f.frame.v;

  // Normal: n = flip * R(t_u, t_v) * decode(stored).
  const Vec3 gn = view.flip * Vec3(dx[gb::kNormal], dx[gb::kNormal + 1], dx[gb::kNormal + 2]);
  const Vec3& nt = f.tangent_normal;
  const Vec3 cross = splat.tangent_u.cross(splat.tangent_v);
  g.tangent_u += gn * nt.x() + splat.tangent_v.cross(gn) * nt.z();
  g.tangent_v += gn * nt.y() + gn.cross(splat.tangent_u) * nt.z();
  const Vec3 d_nt(gn.dot(splat.tangent_u), gn.dot(splat.tangent_v), gn.dot(cross));
  const Vec2 d_stored =
      decode_tangent_normal_backward(f.stored_normal.x(), f.stored_normal.y(), d_nt);

  const BilinearFootprint fp = bilinear_footprint(f.tc.s, f.tc.t, set.resolution());
  double* base = g.texels.data();
  Vec2 d_st = map_backward(set.albedo, fp, &dx[gb::kAlbedo], base);
  d_st += map_backward(set.roughness, fp, &dx[gb::kRoughness], base + texels * 3);
  d_st += map_backward(set.metallic, fp, &dx[gb::kMetallic], base + texels * 4);
  const double d_tn[2] = {d_stored.x(), d_stored.y()};
  d_st += map_backward(set.tangent_normal, fp, d_tn, base + texels * 5);
  du += d_st.x() * f.tc.ds_du;
  dv += d_st.y() * f.tc.dt_dv;

  g.indirect += Vec3(dx[gb::kIndirect], dx[gb::kIndirect + 1], dx[gb::kIndirect + 2]);

  // z = a_z u + b_z v + d_z.
  const double dz = dx[gb::kDepth];
  g.da.z() += dz * f.frame.u;
  g.db.z() += dz * f.frame.v;
  g.dd.z() += dz;
  du += dz * view.a.z();
  dv += dz * view.b.z();

  intersection_backward(f.frame, plane.x(), plane.y(), du, dv, g);
}

void splat_params_backward(const Splat& splat, const SplatView& view, const Camera& camera,
                           const LocalGrad& lg, SplatGrad& out) {
  const Mat3 rot_t = camera.rotation().transpose();
  const Vec3 da = rot_t * lg.da;
  const Vec3 db = rot_t * lg.db;
  out.tangent_u += splat.scale_u * da + lg.tangent_u;
  out.tangent_v += splat.scale_v * db + lg.tangent_v;
  out.scale_u += splat.tangent_u.dot(da);
  out.scale_v += splat.tangent_v.dot(db);
  out.position += rot_t * lg.dd;
  out.opacity += lg.opacity;

  if (lg.indirect.isZero(0.0)) {
    return;
  }
  const ShBackward sb =
      eval_sh_radiance_backward(splat.indirect_sh, view.reflect, lg.indirect, out.sh.data());
  const Vec3 cross = splat.tangent_u.cross(splat.tangent_v);
  const Vec3 n = view.flip * cross.normalized();
  const Vec3 to_camera = camera.center() - splat.position;
  const Vec3 wo = to_camera.normalized();
  const Vec3& g = sb.d_dir;
  const Vec3 dn = 2.0 * (g.dot(n) * wo + n.dot(wo) * g);
  const Vec3 dwo = 2.0 * n.dot(g) * n - g;
  const Vec3 dc = view.flip * normalize_backward(cross, dn);
  out.tangent_u += splat.tangent_v.cross(dc);
  out.tangent_v += dc.cross(splat.tangent_u);
  out.position -= normalize_backward(to_camera, dwo);
}

} // namespace

void splat_backward(const Scene& scene, const Camera& camera, const DrawOrder& order,
                    const GBufferGrad& upstream, SceneGradients& grads, int threads) {
  const TileGrid grid = bin_tiles(camera, order);
  const TextureConfig cfg = effective_config(scene);
  const RasterOptions opts{MaterialMode::PerPrimitive, nullptr, threads};
  const int texel_block = cfg.resolution * cfg.resolution * ChannelLayout{}.total();
  std::vector<TileGrad> tiles(grid.lists.size());

  parallel_for(
      grid.lists.size(),
      [&](std::size_t tile) {
        const auto& list = grid.lists[tile];
        if (list.empty()) {
          return;
        }
        TileGrad& tg = tiles[tile];
        std::vector<int> slot(scene.splats.size(), -1);
        std::vector<Fragment> frags;
        for_each_tile_pixel(camera, grid, tile, [&](int px, int py) {
          const std::size_t p = static_cast<std::size_t>(py) * camera.width + px;
          const double* gx = &upstream.data[p * gb::kChannels];
          const double ga = upstream.alpha[p];
          frags.clear();
          walk_pixel(scene, camera, order, list, px, py, cfg, opts,
                     [&](const Fragment& f) { frags.push_back(f); });
          if (frags.empty()) {
            return;
          }
          const Vec2 plane = camera.pixel_to_plane(px, py);
          Attributes after{};
          double after_alpha = 0.0;
          for (auto it = frags.rbegin(); it != frags.rend(); ++it) {
            const Fragment& f = *it;
            double d_alpha = ga * (1.0 - after_alpha);
            Attributes dx;
            const double w = f.alpha * f.transmittance;
            for (int c = 0; c < gb::kChannels; ++c) {
              d_alpha += gx[c] * (f.x[c] - after[c]);
              dx[c] = w * gx[c];
            }
            d_alpha *= f.transmittance;
            for (int c = 0; c < gb::kChannels; ++c) {
              after[c] = f.alpha * f.x[c] + (1.0 - f.alpha) * after[c];
            }
            after_alpha = f.alpha + (1.0 - f.alpha) * after_alpha;

            int& s = slot[f.splat];
            if (s < 0) {
              s = static_cast<int>(tg.splats.size());
              tg.splats.push_back(f.splat);
              tg.blocks.emplace_back();
              tg.blocks.back().texels.assign(texel_block, 0.0);
            }
            fragment_backward(scene, order.views[f.splat], f, plane, d_alpha, dx, tg.blocks[s]);
          }
        });
      },
      threads);

  // Fixed tile order merge.
  std::vector<LocalGrad> merged(scene.splats.size());
  std::vector<char> touched(scene.splats.size(), 0);
  for (const TileGrad& tg : tiles) {
    for (std::size_t i = 0; i < tg.splats.size(); ++i) {
      const int k = tg.splats[i];
      const LocalGrad& b = tg.blocks[i];
      LocalGrad& m = merged[k];
      if (!touched[k]) {
        touched[k] = 1;
        m.texels.assign(texel_block, 0.0);
      }
      m.da += b.da;
      m.db += b.db;
      m.dd += b.dd;
      m.opacity += b.opacity;
      m.indirect += b.indirect;
      m.tangent_u += b.tangent_u;
      m.tangent_v += b.tangent_v;
      for (int t = 0; t < texel_block; ++t) {
        m.texels[t] += b.texels[t];
      }
    }
  }
  const int texels = cfg.resolution * cfg.resolution;
  for (std::size_t k = 0; k < scene.splats.size(); ++k) {
    if (!touched[k]) {
      continue;
    }
    const Splat& splat = scene.splats[k];
    splat_params_backward(splat, order.views[k], camera, merged[k], grads.splats[k]);
    TextureGrad& tex = grads.textures[splat.texture_id];
    const double* src = merged[k].texels.data();
    for (int t = 0; t < texels * 3; ++t) tex.albedo[t] += src[t];
    for (int t = 0; t < texels; ++t) tex.roughness[t] += src[texels * 3 + t];
    for (int t = 0; t < texels; ++t) tex.metallic[t] += src[texels * 4 + t];
    for (int t = 0; t < texels * 2; ++t) tex.tangent_normal[t] += src[texels * 5 + t];
  }
}

Image render_normal_map(const GBuffer& g, const Camera& camera) {
  Image img(g.width, g.height, 3, 0.5);
  // View axes x right, y up, z toward the viewer.
  const Mat3 to_eye = Vec3(1.0, -1.0, -1.0).asDiagonal() * camera.rotation();
  for (std::size_t p = 0; p < g.pixel_count(); ++p) {
    const Vec3 n = g.normal(p);
    if (g.alpha[p] > kNormalAlphaThreshold && n.norm() > 0.0) {
      const Vec3 e = (to_eye * n.normalized() + Vec3::Ones()) / 2.0;
      for (int c = 0; c < 3; ++c) {
        img.data[p * 3 + c] = e[c];
      }
    }
  }
  return img;
}

Image render_depth_map(const GBuffer& g) {
  Image img(g.width, g.height, 1, 0.0);
  for (std::size_t p = 0; p < g.pixel_count(); ++p) {
    if (g.alpha[p] > 0.0) {
      img.data[p] = g.depth(p) / g.alpha[p];
    }
  }
  return img;
}

} // namespace texsplat
