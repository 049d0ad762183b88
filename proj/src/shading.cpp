#include "texsplat/shading.hpp"

namespace texsplat {

ResolvedPixel resolve_pixel(const GBuffer& g, std::size_t p) {
  ResolvedPixel r;
  r.alpha = g.alpha[p];
  if (!(r.alpha > 0.0)) {
    return r;
  }
  const double inv = 1.0 / r.alpha;
  const double* x = g.pixel(p);
  r.albedo = Vec3(x[gb::kAlbedo], x[gb::kAlbedo + 1], x[gb::kAlbedo + 2]) * inv;
  r.metallic = x[gb::kMetallic] * inv;
  r.roughness = x[gb::kRoughness] * inv;
  r.indirect = Vec3(x[gb::kIndirect], x[gb::kIndirect + 1], x[gb::kIndirect + 2]) * inv;
  r.depth = x[gb::kDepth] * inv;
  const Vec3 n(x[gb::kNormal], x[gb::kNormal + 1], x[gb::kNormal + 2]);
  const double len = n.norm();
  r.normal = len > 0.0 ? Vec3(n / len) : Vec3::UnitZ();
  return r;
}

void resolve_backward(const GBuffer& g, std::size_t p, const ResolvedGrad& d, GBufferGrad& out) {
  const double a = g.alpha[p];
  if (!(a > 0.0)) {
    return;
  }
  const double inv = 1.0 / a;
  const double* x = g.pixel(p);
  double* dx = &out.data[p * gb::kChannels];
  double d_alpha = 0.0;
  auto scalar = [&](int ch, double grad) {
    dx[ch] += grad * inv;
    d_alpha -= grad * x[ch] * inv * inv;
  };
  for (int c = 0; c < 3; ++c) {
    scalar(gb::kAlbedo + c, d.albedo[c]);
    scalar(gb::kIndirect + c, d.indirect[c]);
  }
  scalar(gb::kMetallic, d.metallic);
  scalar(gb::kRoughness, d.roughness);
  scalar(gb::kDepth, d.depth);
  out.alpha[p] += d_alpha;

  const Vec3 n(x[gb::kNormal], x[gb::kNormal + 1], x[gb::kNormal + 2]);
  if (n.norm() > 0.0 && !d.normal.isZero(0.0)) {
    const Vec3 dn = normalize_backward(n, d.normal);
    for (int c = 0; c < 3; ++c) {
      dx[gb::kNormal + c] += dn[c];
    }
  }
}

ShadeResult shade_pixel(const ResolvedPixel& px, const Vec3& outgoing, const EnvironmentLight& env,
                        const BrdfLut& lut, const VisibilityMesh* mesh, const Vec3& point) {
  ShadeResult out;
  const Vec3& n = px.normal;
  const double n_dot_v = n.dot(outgoing);
  out.reflected = reflect_dir(outgoing, n);
  const BrdfLut::Sample ab = lut.lookup(n_dot_v, px.roughness);

  const Vec3 irradiance = env.sample_diffuse(n);
  out.diffuse = (px.albedo * (kInvPi * (1.0 - px.metallic))).cwiseProduct(irradiance);

  if (mesh != nullptr && !mesh->empty()) {
    out.visible = visibility(point, out.reflected, *mesh);
  }
  const Vec3 incoming =
      out.visible ? env.sample_specular(out.reflected, px.roughness) : px.indirect;
  const Vec3 weight = base_reflectance(px.albedo, px.metallic) * ab.scale +
                      Vec3::Constant(ab.bias);
  out.specular = weight.cwiseProduct(incoming);
  out.radiance = out.diffuse + out.specular;
  return out;
}

ShadeBackward shade_pixel_backward(const ResolvedPixel& px, const Vec3& outgoing,
                                   const EnvironmentLight& env, const BrdfLut& lut, int visible,
                                   const Vec3& g) {
  ShadeBackward b;
  ResolvedGrad& d = b.resolved;
  const Vec3& n = px.normal;
  const double n_dot_v = n.dot(outgoing);
  const Vec3 reflected = reflect_dir(outgoing, n);
  const BrdfLut::Sample ab = lut.lookup(n_dot_v, px.roughness);
  const double m = px.metallic;

  // Diffuse.
  const LatLongSample irr = sample_with_grad(env.diffuse, n);
  const double kd = kInvPi * (1.0 - m);
  d.albedo += kd * g.cwiseProduct(irr.value);
  d.metallic -= kInvPi * g.dot(px.albedo.cwiseProduct(irr.value));
  b.d_diffuse_map = kd * g.cwiseProduct(px.albedo);
  b.diffuse_taps = irr.taps;
  Vec3 d_normal = irr.d_dir.transpose() * b.d_diffuse_map;

  // Specular.
  const Vec3 f0 = base_reflectance(px.albedo, m);
  const Vec3 weight = f0 * ab.scale + Vec3::Constant(ab.bias);
  Vec3 incoming;
  SpecularSample spec;
  if (visible) {
    spec = env.sample_specular_with_grad(reflected, px.roughness);
    incoming = spec.value;
  } else {
    incoming = px.indirect;
  }
  const Vec3 d_weight = g.cwiseProduct(incoming);
  const Vec3 d_incoming = g.cwiseProduct(weight);
  const Vec3 d_f0 = d_weight * ab.scale;
  d.albedo += d_f0 * m;
  d.metallic += d_f0.dot(px.albedo - Vec3::Constant(0.04));
  const double d_scale = d_weight.dot(f0);
  const double d_bias = d_weight.sum();
  const double d_nv = d_scale * ab.d_scale_d_nv + d_bias * ab.d_bias_d_nv;
  d.roughness += d_scale * ab.d_scale_d_r + d_bias * ab.d_bias_d_r;
  d_normal += d_nv * outgoing;

  if (visible) {
    d.roughness += d_incoming.dot(spec.d_roughness);
    const Vec3 d_reflected = spec.d_dir.transpose() * d_incoming;
    // reflected = 2 (n.wo) n - wo.
    d_normal += 2.0 * (d_reflected.dot(n) * outgoing + n_dot_v * d_reflected);
    b.level0 = spec.level0;
    b.level1 = spec.level1;
    b.taps0 = spec.taps0;
    b.taps1 = spec.taps1;
    b.d_level0 = (spec.level1 == spec.level0 ? 1.0 : 1.0 - spec.level_frac) * d_incoming;
    b.d_level1 = (spec.level1 == spec.level0 ? 0.0 : spec.level_frac) * d_incoming;
  } else {
    d.indirect += d_incoming;
  }
  d.normal = d_normal;
  return b;
}

namespace {

void scatter_taps(const MapTaps& taps, const Vec3& upstream, std::vector<double>& grid) {
  if (upstream.isZero(0.0)) {
    return;
  }
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c < 3; ++c) {
      grid[static_cast<std::size_t>(taps.index[k]) * 3 + c] += taps.weight[k] * upstream[c];
    }
  }
}

} // namespace

void accumulate_environment(const ShadeBackward& b, EnvironmentGrad& grad) {
  scatter_taps(b.diffuse_taps, b.d_diffuse_map, grad.diffuse);
  scatter_taps(b.taps0, b.d_level0, grad.specular[b.level0]);
  if (b.level1 != b.level0) {
    scatter_taps(b.taps1, b.d_level1, grad.specular[b.level1]);
  }
}

} // namespace texsplat
