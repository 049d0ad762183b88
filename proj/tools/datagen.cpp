// Regenerates the bundled scenes under a data directory.
#include "texsplat/io.hpp"
#include "texsplat/synthetic.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>

using namespace texsplat;

namespace {

std::shared_ptr<const VisibilityMesh> ceiling(double height) {
  const double l = 50.0;
  std::vector<Triangle> tris = {
      {Vec3(-l, -l, height), Vec3(l, -l, height), Vec3(l, l, height)},
      {Vec3(-l, -l, height), Vec3(l, l, height), Vec3(-l, l, height)}};
  return std::make_shared<VisibilityMesh>(tris);
}

void write_views(const fs::path& dir, const Scene& scene, const std::vector<Camera>& cams,
                 const std::vector<std::string>& names, const std::vector<bool>& test) {
  Manifest m;
  m.width = cams.front().width;
  m.height = cams.front().height;
  for (std::size_t k = 0; k < cams.size(); ++k) {
    const std::string file = names[k] + ".pfm";
    write_pfm(dir / file, render(scene, cams[k]).color);
    m.frames.push_back({file, cams[k], test[k]});
  }
  save_manifest(dir / "manifest.json", m);
}

void toy(const fs::path& dir) {
  fs::create_directories(dir);
  RandomSceneOptions o;
  o.splats = 8;
  o.texture_resolution = 4;
  o.seed = 11;
  Scene scene = random_scene(o);
  scene.mesh = ceiling(1.2);
  save_scene(dir / "scene.json", scene);

  // The target comes from a perturbed copy so the residual is not zero.
  Scene target = scene;
  for (Splat& s : target.splats) {
    s.position += Vec3(0.02, -0.01, 0.03);
    s.opacity *= 0.9;
  }
  for (MaterialTextureSet& t : target.textures) {
    for (float& x : t.albedo.texels) x = 1.0f - x;
  }
  const Camera cam = Camera::look_at(Vec3(0, -3, 0.5), Vec3::Zero(), Vec3::UnitZ(), 20.0, 16, 16);
  write_views(dir, target, {cam}, {"target"}, {false});
}

void sphere(const fs::path& dir) {
  fs::create_directories(dir);
  const int res = 48;
  const Scene gt = textured_sphere_scene(32, 0.5, 4, 3);
  save_scene(dir / "scene.json", gt);

  std::vector<Camera> cams = orbit_cameras(7, 2.0, 0.35, res, res, 1.2 * res);
  cams.push_back(orbit_cameras(14, 2.0, 0.35, res, res, 1.2 * res)[1]);
  std::vector<std::string> names;
  std::vector<bool> test;
  for (int k = 0; k < 7; ++k) {
    names.push_back("train_" + std::to_string(k));
    test.push_back(false);
  }
  names.push_back("test_0");
  test.push_back(true);
  write_views(dir, gt, cams, names, test);

  // Known oriented points, default materials, fixed lighting.
  Scene init = gt;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Splat& s : init.splats) {
    s.position += 0.005 * Vec3(g(rng), g(rng), g(rng));
    s.opacity = 0.5;
    s.indirect_sh = IndirectSH(1);
  }
  for (MaterialTextureSet& t : init.textures) {
    t = MaterialTextureSet::uniform(1, Vec3(0.5, 0.5, 0.5), 0.5, 0.0);
  }
  init.texture_config.resolution = 1;
  init.environment.learnable = false;
  save_scene(dir / "init.json", init);

  nlohmann::json cfg = {{"iterations", 600},
                        {"texture_resolution", 4},
                        {"lambda_normal", 0.0},
                        {"lambda_smooth", 0.0},
                        {"lr_final_factor", 0.1},
                        {"lr", {{"texels", 0.02}}},
                        {"frozen", {"frame", "scale"}},
                        {"eval_interval", 100}};
  std::ofstream(dir / "fit_config.json") << cfg.dump(2) << '\n';
}

void single(const fs::path& dir) {
  fs::create_directories(dir);
  Scene scene;
  scene.texture_config.resolution = 4;
  scene.environment = synthetic_environment(16, 8, 3);
  scene.background = Vec3(0.1, 0.1, 0.1);
  Splat s;
  s.position = Vec3(0, 0, 0);
  s.tangent_u = Vec3::UnitX();
  s.tangent_v = Vec3::UnitZ();
  s.scale_u = 0.3;
  s.scale_v = 0.3;
  s.opacity = 0.9;
  s.indirect_sh = IndirectSH(1);
  scene.splats.push_back(s);
  MaterialTextureSet set = MaterialTextureSet::uniform(4, Vec3(0.8, 0.3, 0.2), 0.4, 0.1);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      set.albedo.at(i, j, 1) = static_cast<float>(0.2 + 0.15 * i);
      set.tangent_normal.at(i, j, 0) = static_cast<float>(0.4 + 0.05 * j);
    }
  }
  scene.textures.push_back(set);
  save_scene(dir / "scene.json", scene);
  const Camera cam = Camera::look_at(Vec3(0, -2, 0), Vec3::Zero(), Vec3::UnitZ(), 40.0, 32, 32);
  write_views(dir, scene, {cam}, {"view"}, {false});
}

void empty(const fs::path& dir) {
  fs::create_directories(dir);
  Scene scene;
  scene.environment = synthetic_environment(16, 8, 3);
  scene.background = Vec3(0.2, 0.3, 0.4);
  save_scene(dir / "scene.json", scene);
  const Camera cam = Camera::look_at(Vec3(0, -2, 0), Vec3::Zero(), Vec3::UnitZ(), 20.0, 16, 16);
  write_views(dir, scene, {cam}, {"view"}, {false});
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: texsplat_datagen <data dir>\n";
    return 2;
  }
  try {
    const fs::path root(argv[1]);
    toy(root / "toy");
    sphere(root / "sphere");
    single(root / "single");
    empty(root / "empty");
  } catch (const std::exception& e) {
    std::cerr << "texsplat_datagen: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
