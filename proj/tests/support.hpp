#pragma once

#include "texsplat/io.hpp"
#include "texsplat/losses.hpp"
#include "texsplat/synthetic.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace testing {

using namespace texsplat;

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

/// Random orthonormal tangent pair.
inline void random_frame(std::mt19937_64& rng, Vec3& tu, Vec3& tv) {
  tu = random_unit(rng);
  Vec3 w = random_unit(rng);
  tv = (w - tu * tu.dot(w)).normalized();
}

inline Splat facing_splat(const Vec3& position, double scale, double opacity) {
  Splat s;
  s.position = position;
  s.scale_u = scale;
  s.scale_v = scale;
  s.opacity = opacity;
  s.indirect_sh = IndirectSH(0);
  return s;
}

/// Camera on the +z axis at distance `dist` looking down -z at the origin.
inline Camera axis_camera(double dist, int w = 16, int h = 16, double focal = 16.0) {
  return Camera::look_at(Vec3(0, 0, dist), Vec3::Zero(), Vec3::UnitY(), focal, w, h);
}

/// Horizontal quad far above the scene; occludes upward reflections.
inline std::shared_ptr<const VisibilityMesh> ceiling(double height) {
  const double l = 50.0;
  return std::make_shared<VisibilityMesh>(std::vector<Triangle>{
      {Vec3(-l, -l, height), Vec3(l, -l, height), Vec3(l, l, height)},
      {Vec3(-l, -l, height), Vec3(l, l, height), Vec3(-l, l, height)}});
}

/// 16x16 view of an 8-splat T=4 scene with a visibility mesh; the target
/// comes from a perturbed copy.
inline std::pair<Scene, View> gradient_fixture(std::uint64_t seed) {
  RandomSceneOptions o;
  o.splats = 8;
  o.texture_resolution = 4;
  o.seed = seed;
  Scene s = random_scene(o);
  s.mesh = ceiling(1.2);
  Scene t = s;
  for (Splat& sp : t.splats) {
    sp.position += Vec3(0.02, -0.01, 0.03);
    sp.opacity *= 0.9;
  }
  for (MaterialTextureSet& tx : t.textures) {
    for (float& x : tx.albedo.texels) x = 1.0f - x;
  }
  const Camera cam = Camera::look_at(Vec3(0, -3, 0.5), Vec3::Zero(), Vec3::UnitZ(), 20.0, 16, 16);
  return {s, View{cam, render(t, cam).color}};
}

inline fs::path data_dir() { return fs::path(TEXSPLAT_DATA_DIR); }

inline fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("texsplat_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct RunResult {
  int status = -1;
  std::string out;
};

/// Runs the CLI with `args`; stdout is captured, stderr goes to `log` when given.
inline RunResult run_cli(const std::string& args, const std::string& env = "",
                         const std::string& log = "/dev/null") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(TEXSPLAT_CLI) + " " +
                          args + " 2>" + log;
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool same_bytes(const fs::path& a, const fs::path& b) {
  return fs::exists(a) && fs::exists(b) && read_text(a) == read_text(b);
}

} // namespace testing
