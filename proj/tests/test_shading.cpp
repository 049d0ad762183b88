#include "support.hpp"

#include <doctest.h>

using namespace texsplat;
using namespace testing;

namespace {

// Independent split-sum oracle: pseudo-random GGX half-vector sampling.
Vec2 lut_oracle(double n_dot_v, double roughness, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double a = roughness * roughness;
  const Vec3 v(std::sqrt(1 - n_dot_v * n_dot_v), 0, n_dot_v);
  double sa = 0, sb = 0;
  for (int k = 0; k < samples; ++k) {
    const double x1 = uni(rng), x2 = uni(rng);
    const double ct = std::sqrt((1 - x1) / (1 + (a * a - 1) * x1));
    const double st = std::sqrt(1 - ct * ct);
    const Vec3 h(st * std::cos(2 * kPi * x2), st * std::sin(2 * kPi * x2), ct);
    const Vec3 l = 2 * v.dot(h) * h - v;
    if (l.z() <= 0 || v.dot(h) <= 0) continue;
    const double nl = l.z();
    const double lv = (-1 + std::sqrt(1 + a * a * (1 - n_dot_v * n_dot_v) / (n_dot_v * n_dot_v))) / 2;
    const double ll = (-1 + std::sqrt(1 + a * a * (1 - nl * nl) / (nl * nl))) / 2;
    const double g2 = 1 / (1 + lv + ll);
    const double w = g2 * v.dot(h) / (ct * n_dot_v);
    const double fc = std::pow(1 - v.dot(h), 5);
    sa += (1 - fc) * w;
    sb += fc * w;
  }
  return {sa / samples, sb / samples};
}

std::vector<Triangle> cube(double half) {
  std::vector<Vec3> c;
  for (int k = 0; k < 8; ++k) c.emplace_back(k & 1 ? half : -half, k & 2 ? half : -half, k & 4 ? half : -half);
  const int f[6][4] = {{0, 1, 3, 2}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 3, 7, 5}};
  std::vector<Triangle> t;
  for (const auto& q : f) {
    t.push_back({c[q[0]], c[q[1]], c[q[2]]});
    t.push_back({c[q[0]], c[q[2]], c[q[3]]});
  }
  return t;
}

std::vector<Triangle> random_triangles(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Triangle> t;
  for (int k = 0; k < count; ++k) {
    const Vec3 c(uni(rng), uni(rng), uni(rng));
    t.push_back({c + 0.1 * Vec3(uni(rng), uni(rng), uni(rng)), c + 0.1 * Vec3(uni(rng), uni(rng), uni(rng)),
                 c + 0.1 * Vec3(uni(rng), uni(rng), uni(rng))});
  }
  return t;
}

ResolvedPixel pixel(const Vec3& albedo, double metallic, double roughness, const Vec3& normal) {
  ResolvedPixel p;
  p.albedo = albedo;
  p.metallic = metallic;
  p.roughness = roughness;
  p.normal = normal.normalized();
  p.alpha = 1.0;
  return p;
}

} // namespace

TEST_CASE("LUT bounds") {
  const BrdfLut& lut = default_brdf_lut();
  CHECK(lut.resolution == 64);
  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      const Vec2 ab = lut.cell(i, j);
      CHECK(ab.x() >= 0.0);
      CHECK(ab.y() >= 0.0);
      CHECK(ab.x() <= 1.0);
      CHECK(ab.y() <= 1.0);
      CHECK(ab.x() + ab.y() <= 1.0 + 1e-3);
    }
  }
}

TEST_CASE("LUT against a Monte Carlo oracle") {
  const BrdfLut& lut = default_brdf_lut();
  const Vec2 mirror = lut.cell(63, 0);
  const Vec2 ref = lut_oracle(lut.cell_n_dot_v(63), lut.cell_roughness(0), 200000, 1);
  CHECK(std::abs(mirror.x() - 1.0) <= 2e-2);
  CHECK(std::abs(mirror.y()) <= 2e-2);
  CHECK(std::abs(mirror.x() - ref.x()) <= 2e-2);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cell(0, 63);
  for (int k = 0; k < 6; ++k) {
    const int i = cell(rng), j = cell(rng);
    const Vec2 mc = lut_oracle(lut.cell_n_dot_v(i), lut.cell_roughness(j), 200000, 3 + k);
    CAPTURE(i);
    CAPTURE(j);
    CHECK(std::abs(lut.cell(i, j).x() - mc.x()) <= 2e-2);
    CHECK(std::abs(lut.cell(i, j).y() - mc.y()) <= 2e-2);
  }
  CHECK(precompute_brdf_lut(16, 1024).scale == precompute_brdf_lut(16, 1024).scale);
  CHECK_THROWS_AS(precompute_brdf_lut(8, 4096), std::invalid_argument);
}

TEST_CASE("LUT lookup partials") {
  const BrdfLut& lut = default_brdf_lut();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int k = 0; k < 50; ++k) {
    const double nv = uni(rng), r = uni(rng), h = 1e-7;
    const BrdfLut::Sample s = lut.lookup(nv, r);
    CHECK(s.d_scale_d_nv == doctest::Approx((lut.lookup(nv + h, r).scale - lut.lookup(nv - h, r).scale) / (2 * h)).epsilon(1e-4));
    CHECK(s.d_bias_d_r == doctest::Approx((lut.lookup(nv, r + h).bias - lut.lookup(nv, r - h).bias) / (2 * h)).epsilon(1e-4));
  }
}

TEST_CASE("constant environment stays constant") {
  const EnvironmentLight env = EnvironmentLight::constant(Vec3(0.7, 0.3, 1.5), 32, 16, 4, 8, 4);
  CHECK(env.levels() == 4);
  for (int l = 0; l < env.levels(); ++l) {
    const auto [w, h] = mip_resolution(32, 16, l);
    CHECK(env.specular[l].width == w);
    CHECK(env.specular[l].height == h);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        CHECK((env.specular[l].texel(i, j) - Vec3(0.7, 0.3, 1.5)).norm() < 1e-6);
      }
    }
  }
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vec3 e = env.sample_diffuse(random_unit(rng));
    CHECK(std::abs(e.x() - kPi * 0.7) <= 0.01 * kPi * 0.7);
    CHECK(std::abs(e.z() - kPi * 1.5) <= 0.01 * kPi * 1.5);
  }
}

TEST_CASE("mip resolutions") {
  CHECK(mip_resolution(256, 128, 0) == std::pair{256, 128});
  CHECK(mip_resolution(256, 128, 3) == std::pair{32, 16});
  CHECK(mip_resolution(256, 128, 7) == std::pair{4, 2});
}

TEST_CASE("prefiltering spreads a bright texel") {
  LatLongMap base(32, 16, 0.0f);
  base.set_texel(8, 5, Vec3(100, 100, 100));
  const Vec3 peak = base.texel_direction(8, 5);
  const std::vector<LatLongMap> mips = prefilter_specular(base, 5);
  CHECK(mips[0] == base);
  double prev = -1.0;
  for (const LatLongMap& m : mips) {
    double mass = 0, spread = 0;
    for (int j = 0; j < m.height; ++j) {
      for (int i = 0; i < m.width; ++i) {
        const double w = m.texel(i, j).x() * m.texel_solid_angle(j);
        mass += w;
        spread += w * (1.0 - peak.dot(m.texel_direction(i, j)));
      }
    }
    CHECK(mass > 0.0);
    CHECK(spread / mass > prev);
    prev = spread / mass;
  }
}

TEST_CASE("zero roughness samples the base map") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const Vec3 d = random_unit(rng);
    CHECK(env.sample_specular(d, 0.0) == env.specular[0].sample(d));
  }
}

TEST_CASE("diffuse irradiance") {
  const LatLongMap zero(32, 16, 0.0f);
  const LatLongMap e0 = diffuse_irradiance(zero, 8, 4);
  for (float x : e0.texels) CHECK(x == 0.0f);

  LatLongMap upper(64, 32, 0.0f);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 64; ++i) upper.set_texel(i, j, Vec3(1, 1, 1));
  }
  const LatLongMap e = diffuse_irradiance(upper, 16, 8);
  CHECK(e.sample(-Vec3::UnitZ()).x() < 0.02 * kPi);
  CHECK(e.sample(Vec3::UnitZ()).x() == doctest::Approx(kPi).epsilon(0.01));
}

TEST_CASE("latlong gradients") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    Vec3 d = random_unit(rng);
    if (std::abs(d.z()) > 0.9) continue;
    const LatLongSample s = sample_with_grad(env.diffuse, d);
    CHECK((s.value - env.diffuse.sample(d)).norm() < 1e-12);
    for (int a = 0; a < 3; ++a) {
      Vec3 dp = d, dm = d;
      dp[a] += 1e-6;
      dm[a] -= 1e-6;
      const Vec3 fd = (env.diffuse.sample(dp) - env.diffuse.sample(dm)) / 2e-6;
      CHECK((s.d_dir.col(a) - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
    }
    const double r = 0.37;
    const SpecularSample sp = env.sample_specular_with_grad(d, r);
    const Vec3 fr = (env.sample_specular(d, r + 1e-6) - env.sample_specular(d, r - 1e-6)) / 2e-6;
    CHECK((sp.d_roughness - fr).norm() <= 1e-4 * std::max(1.0, fr.norm()));
  }
}

TEST_CASE("reflect direction") {
  const Vec3 n = Vec3::UnitZ();
  CHECK(reflect_dir(n, n) == n);
  CHECK(reflect_dir(Vec3::UnitX(), n) == -Vec3::UnitX());
  const double s = std::sin(kPi / 4), c = std::cos(kPi / 4);
  CHECK((reflect_dir(Vec3(0, s, c), n) - Vec3(0, -s, c)).norm() < 1e-12);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const Vec3 w = random_unit(rng), m = random_unit(rng);
    const Vec3 r = reflect_dir(w, m);
    CHECK(std::abs(r.norm() - 1.0) < 1e-6);
    CHECK((reflect_dir(r, m) - w).norm() < 1e-6);
  }
}

TEST_CASE("constant environment diffuse") {
  const Vec3 l0(0.8, 0.8, 0.8);
  const EnvironmentLight env = EnvironmentLight::constant(l0, 64, 32, 4, 16, 8);
  const ShadeResult r = shade_pixel(pixel(Vec3::Ones(), 0.0, 1.0, Vec3::UnitZ()), Vec3::UnitZ(), env,
                                    default_brdf_lut());
  CHECK((r.diffuse - l0).norm() <= 0.01 * l0.norm());
  CHECK(r.specular.x() > 0.0);
  CHECK(r.specular.x() < 0.1 * l0.x());
  CHECK((r.radiance - r.diffuse - r.specular).norm() < 1e-15);
}

TEST_CASE("specular weight follows F0 A + B") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  const ResolvedPixel px = pixel(Vec3(0.9, 0.6, 0.3), 1.0, 0.0, Vec3::UnitZ());
  const ShadeResult r = shade_pixel(px, px.normal, env, default_brdf_lut());
  const BrdfLut::Sample ab = default_brdf_lut().lookup(1.0, 0.0);
  const Vec3 e = env.sample_specular(Vec3::UnitZ(), 0.0);
  CHECK((r.reflected - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(r.diffuse.norm() == 0.0);
  for (int c = 0; c < 3; ++c) CHECK(r.specular[c] == doctest::Approx((px.albedo[c] * ab.scale + ab.bias) * e[c]));
  // A white metallic mirror returns the environment within LUT tolerance.
  const ShadeResult w = shade_pixel(pixel(Vec3::Ones(), 1.0, 0.0, Vec3::UnitZ()), Vec3::UnitZ(), env,
                                    default_brdf_lut());
  for (int c = 0; c < 3; ++c) CHECK(std::abs(w.radiance[c] - e[c]) <= 3e-2 * e[c]);
}

TEST_CASE("specular energy bound") {
  const Vec3 l0(1.0, 1.0, 1.0);
  const EnvironmentLight env = EnvironmentLight::constant(l0, 32, 16, 4, 8, 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    Vec3 n = random_unit(rng);
    Vec3 wo = random_unit(rng);
    if (wo.dot(n) < 0) wo = -wo;
    const ResolvedPixel px = pixel(Vec3(uni(rng), uni(rng), uni(rng)), uni(rng), uni(rng), n);
    const ShadeResult r = shade_pixel(px, wo, env, default_brdf_lut());
    const BrdfLut::Sample ab = default_brdf_lut().lookup(n.dot(wo), px.roughness);
    for (int c = 0; c < 3; ++c) {
      CHECK(r.specular[c] <= l0[c] * (ab.scale + ab.bias) + 1e-9);
      CHECK(r.specular[c] <= l0[c] * (1.0 + 1e-3));
    }
  }
}

TEST_CASE("shading is continuous in roughness") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  double peak = 0;
  for (float x : env.specular[0].texels) peak = std::max(peak, static_cast<double>(x));
  std::mt19937_64 rng(10);
  for (int k = 0; k < 200; ++k) {
    const Vec3 n = random_unit(rng);
    const double r = 0.998 * (k / 200.0);
    const ShadeResult a = shade_pixel(pixel(Vec3(0.5, 0.5, 0.5), 0.5, r, n), n, env, default_brdf_lut());
    const ShadeResult b = shade_pixel(pixel(Vec3(0.5, 0.5, 0.5), 0.5, r + 1e-3, n), n, env, default_brdf_lut());
    CHECK((a.radiance - b.radiance).cwiseAbs().maxCoeff() <= 0.1 * peak);
  }
}

TEST_CASE("shading backward matches finite differences") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  const BrdfLut& lut = default_brdf_lut();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.15, 0.85);
  const Vec3 up(0.3, -0.7, 0.5);
  for (int k = 0; k < 20; ++k) {
    Vec3 n = random_unit(rng);
    Vec3 wo = (n + 0.6 * random_unit(rng)).normalized();
    if (wo.dot(n) < 0.1) continue;
    ResolvedPixel px = pixel(Vec3(uni(rng), uni(rng), uni(rng)), uni(rng), uni(rng), n);
    px.indirect = Vec3(0.2, 0.1, 0.3);
    const ShadeBackward b = shade_pixel_backward(px, wo, env, lut, 1, up);
    auto f = [&](const ResolvedPixel& q) { return up.dot(shade_pixel(q, wo, env, lut).radiance); };
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      ResolvedPixel p = px, m = px;
      p.albedo[c] += h;
      m.albedo[c] -= h;
      CHECK(b.resolved.albedo[c] == doctest::Approx((f(p) - f(m)) / (2 * h)).epsilon(1e-4));
      p = px;
      m = px;
      p.normal[c] += h;
      m.normal[c] -= h;
      CHECK(b.resolved.normal[c] == doctest::Approx((f(p) - f(m)) / (2 * h)).epsilon(1e-4));
    }
    ResolvedPixel p = px, m = px;
    p.metallic += h;
    m.metallic -= h;
    CHECK(b.resolved.metallic == doctest::Approx((f(p) - f(m)) / (2 * h)).epsilon(1e-4));
    p = px;
    m = px;
    p.roughness += h;
    m.roughness -= h;
    CHECK(b.resolved.roughness == doctest::Approx((f(p) - f(m)) / (2 * h)).epsilon(1e-4));
  }
}

TEST_CASE("occluded pixels use the indirect term") {
  const EnvironmentLight env = synthetic_environment(32, 16, 4);
  const VisibilityMesh roof(cube(1.0));
  ResolvedPixel px = pixel(Vec3(0.5, 0.5, 0.5), 0.0, 0.2, Vec3::UnitZ());
  px.indirect = Vec3(0.25, 0.5, 0.75);
  const ShadeResult r = shade_pixel(px, Vec3::UnitZ(), env, default_brdf_lut(), &roof, Vec3::Zero());
  CHECK(r.visible == 0);
  const BrdfLut::Sample ab = default_brdf_lut().lookup(1.0, 0.2);
  const double w = 0.04 * ab.scale + ab.bias;
  CHECK((r.specular - w * px.indirect).norm() < 1e-12);
  const ShadeResult open = shade_pixel(px, Vec3::UnitZ(), env, default_brdf_lut());
  CHECK(open.visible == 1);
}

TEST_CASE("visibility against a closed cube") {
  const VisibilityMesh mesh(cube(1.0));
  CHECK(mesh.covers_all_triangles());
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-0.9, 0.9);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 o(uni(rng), uni(rng), uni(rng));
    CHECK(visibility(o, random_unit(rng), mesh) == 0);
  }
  const VisibilityMesh empty;
  CHECK(visibility(Vec3::Zero(), Vec3::UnitX(), empty) == 1);
  CHECK(visibility(Vec3(0, 0, 3), Vec3::UnitZ(), mesh) == 1);
}

TEST_CASE("BVH agrees with brute force") {
  const VisibilityMesh mesh(random_triangles(1000, 13));
  CHECK(mesh.covers_all_triangles());
  CHECK(mesh.node_count() > 1);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  int hits = 0;
  for (int k = 0; k < 3000; ++k) {
    const Vec3 o(uni(rng), uni(rng), uni(rng));
    const Vec3 d = random_unit(rng);
    const bool bvh = mesh.occluded(o, d);
    CHECK(bvh == mesh.occluded_brute_force(o, d));
    hits += bvh;
  }
  CHECK(hits > 300);
  CHECK(hits < 2700);
}

TEST_CASE("triangle intersection") {
  const Triangle t{Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)};
  const auto hit = intersect_triangle(Vec3(0.2, 0.2, 0), Vec3::UnitZ(), t);
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(1.0));
  CHECK_FALSE(intersect_triangle(Vec3(0.2, 0.2, 0), -Vec3::UnitZ(), t).has_value());
  CHECK_FALSE(intersect_triangle(Vec3(0.8, 0.8, 0), Vec3::UnitZ(), t).has_value());
}

TEST_CASE("indirect SH") {
  Splat s;
  s.indirect_sh = IndirectSH(3);
  std::mt19937_64 rng(15);
  CHECK(eval_indirect(s, random_unit(rng)) == Vec3::Zero());
  s.indirect_sh.coeffs[0] = 1.0;
  s.indirect_sh.coeffs[1] = 2.0;
  s.indirect_sh.coeffs[2] = 3.0;
  const double y00 = 0.28209479177387814;
  for (int k = 0; k < 20; ++k) CHECK((eval_indirect(s, random_unit(rng)) - y00 * Vec3(1, 2, 3)).norm() < 1e-12);

  s.indirect_sh = IndirectSH(1);
  s.indirect_sh.coeffs[0] = 5.0;
  s.indirect_sh.coeffs[2 * 3] = 0.7;
  const double diff = eval_indirect(s, Vec3::UnitZ()).x() - eval_indirect(s, -Vec3::UnitZ()).x();
  CHECK(std::abs(diff) == doctest::Approx(2 * 0.7 * 0.4886025119029199));

  s.indirect_sh.coeffs[0] = -5.0;
  CHECK(eval_indirect(s, Vec3::UnitX()).x() == 0.0);
}

TEST_CASE("SH basis gradient") {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 20; ++k) {
    const Vec3 d = 1.7 * random_unit(rng);
    double b[16];
    Vec3 g[16];
    sh_basis_with_grad(3, d, b, g);
    double ref[16];
    sh_basis(3, d, ref);
    for (int i = 0; i < 16; ++i) {
      CHECK(b[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      for (int a = 0; a < 3; ++a) {
        Vec3 dp = d, dm = d;
        dp[a] += 1e-6;
        dm[a] -= 1e-6;
        double bp[16], bm[16];
        sh_basis(3, dp, bp);
        sh_basis(3, dm, bm);
        CHECK(g[i][a] == doctest::Approx((bp[i] - bm[i]) / 2e-6).epsilon(1e-4).scale(1.0));
      }
    }
  }
}
