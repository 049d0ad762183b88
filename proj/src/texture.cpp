#include "texsplat/texture.hpp"

namespace texsplat {

std::string_view to_string(TextureSemantic semantic) {
  switch (semantic) {
    case TextureSemantic::Albedo:
      return "albedo";
    case TextureSemantic::Roughness:
      return "roughness";
    case TextureSemantic::Metallic:
      return "metallic";
    case TextureSemantic::TangentNormalXY:
      return "tangent_normal_xy";
    case TextureSemantic::Generic:
      break;
  }
  return "generic";
}

bool MaterialTextureSet::consistent() const {
  const int t = albedo.resolution;
  return roughness.resolution == t && metallic.resolution == t && tangent_normal.resolution == t &&
         albedo.channels == 3 && roughness.channels == 1 && metallic.channels == 1 &&
         tangent_normal.channels == 2;
}

MaterialTextureSet MaterialTextureSet::uniform(int resolution, const Vec3& albedo, double roughness,
                                               double metallic, const Vec2& tangent_normal) {
  MaterialTextureSet set;
  set.albedo = TextureMap(resolution, 3, TextureSemantic::Albedo);
  set.roughness = TextureMap(resolution, 1, TextureSemantic::Roughness, static_cast<float>(roughness));
  set.metallic = TextureMap(resolution, 1, TextureSemantic::Metallic, static_cast<float>(metallic));
  set.tangent_normal = TextureMap(resolution, 2, TextureSemantic::TangentNormalXY);
  for (int k = 0; k < resolution * resolution; ++k) {
    for (int c = 0; c < 3; ++c) {
      set.albedo.texels[k * 3 + c] = static_cast<float>(albedo[c]);
    }
    set.tangent_normal.texels[k * 2 + 0] = static_cast<float>(tangent_normal.x());
    set.tangent_normal.texels[k * 2 + 1] = static_cast<float>(tangent_normal.y());
  }
  return set;
}

namespace {

TextureMap broadcast_map(const TextureMap& src, int resolution) {
  TextureMap out(resolution, src.channels, src.semantic);
  for (int k = 0; k < resolution * resolution; ++k) {
    for (int c = 0; c < src.channels; ++c) {
      out.texels[k * src.channels + c] = src.texels[c];
    }
  }
  return out;
}

TextureMap average_map(const TextureMap& src) {
  TextureMap out(1, src.channels, src.semantic);
  const int n = src.texel_count();
  for (int c = 0; c < src.channels; ++c) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += src.texels[k * src.channels + c];
    }
    out.texels[c] = static_cast<float>(sum / n);
  }
  return out;
}

} // namespace

MaterialTextureSet MaterialTextureSet::broadcast(int resolution) const {
  return {broadcast_map(albedo, resolution), broadcast_map(roughness, resolution),
          broadcast_map(metallic, resolution), broadcast_map(tangent_normal, resolution)};
}

MaterialTextureSet MaterialTextureSet::averaged() const {
  return {average_map(albedo), average_map(roughness), average_map(metallic),
          average_map(tangent_normal)};
}

TexCoord uv_to_st(double u, double v, const TextureConfig& cfg) {
  const double span = 2.0 * cfg.support;
  const double h = cfg.half_texel();
  TexCoord tc;
  const double s = (u + cfg.support) / span;
  const double t = (v + cfg.support) / span;
  tc.s = std::clamp(s, h, 1.0 - h);
  tc.t = std::clamp(t, h, 1.0 - h);
  tc.ds_du = (s > h && s < 1.0 - h) ? 1.0 / span : 0.0;
  tc.dt_dv = (t > h && t < 1.0 - h) ? 1.0 / span : 0.0;
  return tc;
}

TexelValue bilinear_sample(const TextureMap& tex, double s, double t) {
  const BilinearFootprint fp = bilinear_footprint(s, t, tex.resolution);
  const auto idx = fp.texel_indices(tex.resolution);
  const int ch = tex.channels;
  TexelValue out{};
  for (int c = 0; c < ch; ++c) {
    out[c] = bilinear_combine(tex.texels[idx[0] * ch + c], tex.texels[idx[1] * ch + c],
                              tex.texels[idx[2] * ch + c], tex.texels[idx[3] * ch + c], fp);
  }
  return out;
}

void BilinearGrad::accumulate(std::span<double> grad_texels, int channels,
                              const TexelValue& upstream) const {
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c < channels; ++c) {
      grad_texels[static_cast<std::size_t>(texel_index[k]) * channels + c] += weight[k] * upstream[c];
    }
  }
}

BilinearGrad bilinear_sample_grad(const TextureMap& tex, double s, double t,
                                  const TexelValue& upstream) {
  const int res = tex.resolution;
  const BilinearFootprint fp = bilinear_footprint(s, t, res);
  BilinearGrad g;
  g.texel_index = fp.texel_indices(res);
  g.weight = fp.weights();
  const int ch = tex.channels;
  for (int c = 0; c < ch; ++c) {
    const double t00 = tex.texels[g.texel_index[0] * ch + c];
    const double t10 = tex.texels[g.texel_index[1] * ch + c];
    const double t01 = tex.texels[g.texel_index[2] * ch + c];
    const double t11 = tex.texels[g.texel_index[3] * ch + c];
    const double dfx = (1.0 - fp.fy) * (t10 - t00) + fp.fy * (t11 - t01);
    const double dfy = (1.0 - fp.fx) * (t01 - t00) + fp.fx * (t11 - t10);
    g.d_s += upstream[c] * dfx * res;
    g.d_t += upstream[c] * dfy * res;
  }
  return g;
}

MaterialSample sample_material(const MaterialTextureSet& set, double s, double t) {
  const TexelValue a = bilinear_sample(set.albedo, s, t);
  const TexelValue r = bilinear_sample(set.roughness, s, t);
  const TexelValue m = bilinear_sample(set.metallic, s, t);
  const TexelValue n = bilinear_sample(set.tangent_normal, s, t);
  return {Vec3(a[0], a[1], a[2]), r[0], m[0], Vec2(n[0], n[1])};
}

Vec3 decode_tangent_normal(double a, double b) {
  double nx = 2.0 * a - 1.0;
  double ny = 2.0 * b - 1.0;
  const double r2 = nx * nx + ny * ny;
  if (r2 > 1.0) {
    const double r = std::sqrt(r2);
    return {nx / r, ny / r, 0.0};
  }
  return {nx, ny, std::sqrt(std::max(0.0, 1.0 - r2))};
}

Vec2 decode_tangent_normal_backward(double a, double b, const Vec3& upstream) {
  const double nx = 2.0 * a - 1.0;
  const double ny = 2.0 * b - 1.0;
  const double r2 = nx * nx + ny * ny;
  Vec2 d_n;
  if (r2 > 1.0) {
    const double r = std::sqrt(r2);
    const Vec2 dir(nx / r, ny / r);
    const Vec2 up(upstream.x(), upstream.y());
    d_n = (up - dir * dir.dot(up)) / r;
  } else {
    const double nz = std::sqrt(std::max(0.0, 1.0 - r2));
    d_n = Vec2(upstream.x(), upstream.y());
    if (nz > 0.0) {
      d_n.x() -= upstream.z() * nx / nz;
      d_n.y() -= upstream.z() * ny / nz;
    }
  }
  return 2.0 * d_n;
}

Vec3 normal_to_world(const Splat& splat, const Vec3& tangent_normal) {
  return splat.tangent_u * tangent_normal.x() + splat.tangent_v * tangent_normal.y() +
         splat.tangent_u.cross(splat.tangent_v) * tangent_normal.z();
}

} // namespace texsplat
