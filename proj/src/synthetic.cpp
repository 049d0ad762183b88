#include "texsplat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace texsplat {

LatLongMap procedural_sky(int width, int height) {
  LatLongMap map(width, height);
  const Vec3 sun = Vec3(0.6, 0.3, 0.74).normalized();
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const Vec3 dir = map.texel_direction(i, j);
      const double up = 0.5 * (dir.z() + 1.0);
      Vec3 c = Vec3(0.25, 0.2, 0.15) * (1.0 - up) + Vec3(0.4, 0.6, 0.95) * up;
      const double lobe = std::pow(std::max(0.0, dir.dot(sun)), 16.0);
      c += Vec3(3.0, 2.4, 1.6) * lobe;
      // Band of azimuthal variation so reflections carry structure.
      c *= 0.8 + 0.2 * std::cos(3.0 * std::atan2(dir.y(), dir.x()));
      map.set_texel(i, j, c);
    }
  }
  return map;
}

EnvironmentLight synthetic_environment(int width, int height, int levels) {
  return EnvironmentLight::from_base(procedural_sky(width, height), levels,
                                     std::max(4, width / 4), std::max(2, height / 4));
}

namespace {

void frame_from_normal(const Vec3& n, Vec3& tu, Vec3& tv) {
  const Vec3 helper = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  tu = helper.cross(n).normalized();
  tv = n.cross(tu);
}

float unit(std::mt19937_64& rng, double lo, double hi) {
  return static_cast<float>(std::uniform_real_distribution<double>(lo, hi)(rng));
}

MaterialTextureSet random_material(int res, std::mt19937_64& rng) {
  MaterialTextureSet set = MaterialTextureSet::uniform(res, Vec3(0.5, 0.5, 0.5), 0.5, 0.0);
  for (float& x : set.albedo.texels) x = unit(rng, 0.1, 0.9);
  for (float& x : set.roughness.texels) x = unit(rng, 0.2, 0.8);
  for (float& x : set.metallic.texels) x = unit(rng, 0.0, 0.6);
  for (float& x : set.tangent_normal.texels) x = unit(rng, 0.3, 0.7);
  return set;
}

} // namespace

Scene random_scene(const RandomSceneOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> pos(-opts.spread, opts.spread);
  std::uniform_real_distribution<double> scale(opts.min_scale, opts.max_scale);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Scene scene;
  scene.texture_config.resolution = opts.texture_resolution;
  scene.environment = synthetic_environment(16, 8, 3);
  scene.background = Vec3(0.05, 0.05, 0.08);
  for (int k = 0; k < opts.splats; ++k) {
    Splat s;
    s.position = Vec3(pos(rng), pos(rng), pos(rng));
    const Vec3 n = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    frame_from_normal(n, s.tangent_u, s.tangent_v);
    s.scale_u = scale(rng);
    s.scale_v = scale(rng);
    s.opacity = std::uniform_real_distribution<double>(0.4, 0.9)(rng);
    s.texture_id = k;
    s.indirect_sh = IndirectSH(opts.sh_degree);
    for (double& c : s.indirect_sh.coeffs) c = 0.1 * gauss(rng);
    for (int c = 0; c < 3; ++c) s.indirect_sh.coeffs[c] += 0.8;
    scene.splats.push_back(s);
    scene.textures.push_back(opts.random_textures
                                 ? random_material(opts.texture_resolution, rng)
                                 : MaterialTextureSet::uniform(opts.texture_resolution,
                                                               Vec3(0.5, 0.5, 0.5), 0.5, 0.0));
  }
  return scene;
}

Scene textured_sphere_scene(int count, double radius, int texture_resolution,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scene scene;
  scene.texture_config.resolution = texture_resolution;
  scene.environment = synthetic_environment();
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double sigma = radius * 1.6 / std::sqrt(static_cast<double>(count));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (k + 0.5) * 2.0 / count;
    const double r = std::sqrt(1.0 - z * z);
    const Vec3 n(r * std::cos(golden * k), r * std::sin(golden * k), z);
    Splat s;
    s.position = radius * n;
    frame_from_normal(n, s.tangent_u, s.tangent_v);
    s.scale_u = sigma;
    s.scale_v = sigma;
    s.opacity = 0.95;
    s.texture_id = k;
    s.indirect_sh = IndirectSH(1);
    for (int c = 0; c < 3; ++c) s.indirect_sh.coeffs[c] = 0.6;
    scene.splats.push_back(s);

    MaterialTextureSet set;
    set.albedo = TextureMap(texture_resolution, 3, TextureSemantic::Albedo);
    set.roughness = TextureMap(texture_resolution, 1, TextureSemantic::Roughness);
    set.metallic = TextureMap(texture_resolution, 1, TextureSemantic::Metallic);
    set.tangent_normal = TextureMap(texture_resolution, 2, TextureSemantic::TangentNormalXY);
    const Vec3 base(unit(rng, 0.2, 0.8), unit(rng, 0.2, 0.8), unit(rng, 0.2, 0.8));
    const double rough = unit(rng, 0.3, 0.6);
    for (int j = 0; j < texture_resolution; ++j) {
      for (int i = 0; i < texture_resolution; ++i) {
        const bool checker = (i + j) % 2 == 0;
        for (int c = 0; c < 3; ++c) {
          set.albedo.at(i, j, c) = static_cast<float>(checker ? base[c] : 1.0 - 0.8 * base[c]);
        }
        set.roughness.at(i, j, 0) = static_cast<float>(rough);
        set.metallic.at(i, j, 0) = 0.0f;
        set.tangent_normal.at(i, j, 0) = unit(rng, 0.25, 0.75);
        set.tangent_normal.at(i, j, 1) = unit(rng, 0.25, 0.75);
      }
    }
    scene.textures.push_back(set);
  }
  return scene;
}

std::vector<Camera> orbit_cameras(int count, double distance, double elevation, int width,
                                  int height, double focal) {
  std::vector<Camera> cams;
  for (int k = 0; k < count; ++k) {
    const double phi = 2.0 * kPi * k / count;
    const Vec3 eye = distance * Vec3(std::cos(elevation) * std::cos(phi),
                                     std::cos(elevation) * std::sin(phi), std::sin(elevation));
    cams.push_back(Camera::look_at(eye, Vec3::Zero(), Vec3::UnitZ(), focal, width, height));
  }
  return cams;
}

Dataset render_dataset(const Scene& scene, const std::vector<Camera>& cameras,
                       const std::vector<int>& test_indices, const RenderSettings& settings) {
  Dataset data;
  for (std::size_t k = 0; k < cameras.size(); ++k) {
    View v{cameras[k], render(scene, cameras[k], settings).color};
    const bool test =
        std::find(test_indices.begin(), test_indices.end(), static_cast<int>(k)) !=
        test_indices.end();
    (test ? data.test : data.train).push_back(std::move(v));
  }
  return data;
}

Scene initialize_scene(const std::vector<Vec3>& points, const std::vector<Vec3>& normals,
                       double scale, const EnvironmentLight& env_shape, int sh_degree) {
  Scene scene;
  scene.texture_config.resolution = 1;
  for (std::size_t k = 0; k < points.size(); ++k) {
    Splat s;
    s.position = points[k];
    frame_from_normal(normals[k].normalized(), s.tangent_u, s.tangent_v);
    s.scale_u = scale;
    s.scale_v = scale;
    s.opacity = 0.5;
    s.texture_id = static_cast<int>(k);
    s.indirect_sh = IndirectSH(sh_degree);
    scene.splats.push_back(s);
    scene.textures.push_back(MaterialTextureSet::uniform(1, Vec3(0.5, 0.5, 0.5), 0.5, 0.0));
  }
  scene.environment = env_shape;
  for (LatLongMap& m : scene.environment.specular) {
    std::fill(m.texels.begin(), m.texels.end(), 0.5f);
  }
  // Irradiance of a constant 0.5 environment.
  std::fill(scene.environment.diffuse.texels.begin(), scene.environment.diffuse.texels.end(),
            static_cast<float>(0.5 * kPi));
  scene.environment.learnable = true;
  return scene;
}

void sphere_shell(int count, double radius, std::uint64_t seed, std::vector<Vec3>& points,
                  std::vector<Vec3>& normals) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  points.clear();
  normals.clear();
  for (int k = 0; k < count; ++k) {
    const Vec3 n = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    normals.push_back(n);
    points.push_back(radius * n);
  }
}

} // namespace texsplat
