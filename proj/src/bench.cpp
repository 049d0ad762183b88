#include "texsplat/bench.hpp"

#include "texsplat/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace texsplat {

namespace {

double time_once(const Scene& scene, const Camera& camera, const RasterOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const DrawOrder order = sort_and_cull(scene, camera);
  const GBuffer g = splat_attributes(scene, camera, order, opts);
  const auto t1 = std::chrono::steady_clock::now();
  // Keep the result observable.
  volatile double sink = g.alpha.empty() ? 0.0 : g.alpha[g.alpha.size() / 2];
  (void)sink;
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

BenchTiming summarize(const std::string& mode, const std::vector<double>& ms,
                      double samples_per_frame) {
  BenchTiming t;
  t.mode = mode;
  t.median_ms = percentile(ms, 0.5);
  t.p95_ms = percentile(ms, 0.95);
  t.fps = t.median_ms > 0.0 ? 1000.0 / t.median_ms : 0.0;
  t.ns_per_sample = samples_per_frame > 0.0 ? t.median_ms * 1e6 / samples_per_frame : 0.0;
  return t;
}

} // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

std::vector<double> time_gbuffer(const Scene& scene, const std::vector<Camera>& path,
                                 const RasterOptions& opts, int repetitions) {
  std::vector<double> ms;
  for (int r = 0; r < repetitions; ++r) {
    for (const Camera& cam : path) {
      ms.push_back(time_once(scene, cam, opts));
    }
  }
  return ms;
}

BenchReport bench_sampling(const Scene& scene, const std::vector<Camera>& path, int repetitions,
                           int threads) {
  if (path.empty() || repetitions < 1) {
    throw std::invalid_argument("bench: need at least one camera and one repetition");
  }
  const AtlasSet atlas = pack_atlases(scene.textures);
  const std::array<RasterOptions, 3> modes = {
      RasterOptions{MaterialMode::Scalar, nullptr, threads},
      RasterOptions{MaterialMode::PerPrimitive, nullptr, threads},
      RasterOptions{MaterialMode::Atlas, &atlas, threads}};

  BenchReport report;
  report.splats = scene.splats.size();
  report.texture_resolution = scene.texture_resolution();
  report.width = path.front().width;
  report.height = path.front().height;
  report.frames = static_cast<int>(path.size()) * repetitions;
  std::size_t samples = 0;
  for (const Camera& cam : path) {
    samples += count_fragments(scene, cam, sort_and_cull(scene, cam));
  }
  report.samples_per_frame = samples / path.size();

  // Warm caches and the thread pool once per mode.
  for (const RasterOptions& m : modes) {
    time_once(scene, path.front(), m);
  }
  std::array<std::vector<double>, 3> ms;
  int frame = 0;
  for (int r = 0; r < repetitions; ++r) {
    for (const Camera& cam : path) {
      // Rotate the mode order so no mode always runs first.
      for (int k = 0; k < 3; ++k) {
        const int m = (k + frame) % 3;
        ms[m].push_back(time_once(scene, cam, modes[m]));
      }
      ++frame;
    }
  }
  const double spf = static_cast<double>(report.samples_per_frame);
  report.baseline = summarize("baseline", ms[0], spf);
  report.software = summarize("software", ms[1], spf);
  report.atlas = summarize("atlas", ms[2], spf);
  for (BenchTiming* t : {&report.baseline, &report.software, &report.atlas}) {
    t->ratio = t->median_ms > 0.0 ? report.baseline.median_ms / t->median_ms : 0.0;
  }
  report.baseline.ratio = 1.0;
  return report;
}

Scene bench_scene(int splats, int texture_resolution, std::uint64_t seed) {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  sphere_shell(splats, 1.0, seed, points, normals);
  Scene scene = initialize_scene(points, normals, 0.04, synthetic_environment(16, 8, 3), 0);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  scene.texture_config.resolution = texture_resolution;
  for (std::size_t k = 0; k < scene.splats.size(); ++k) {
    scene.splats[k].opacity = 0.6 + 0.3 * u(rng);
    MaterialTextureSet set = scene.textures[k].broadcast(texture_resolution);
    for (TextureMap* m : {&set.albedo, &set.roughness, &set.metallic, &set.tangent_normal}) {
      for (float& x : m->texels) x = u(rng);
    }
    scene.textures[k] = std::move(set);
  }
  return scene;
}

std::vector<Camera> bench_path(int frames, int width, int height) {
  return orbit_cameras(frames, 3.0, 0.3, width, height, 1.2 * width);
}

} // namespace texsplat
