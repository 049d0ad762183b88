#pragma once

#include "texsplat/atlas.hpp"
#include "texsplat/rasterizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace texsplat {

struct BenchTiming {
  std::string mode;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double fps = 0.0;
  double ns_per_sample = 0.0;
  /// Throughput relative to the untextured baseline (baseline time / this time).
  double ratio = 1.0;
};

struct BenchReport {
  std::size_t splats = 0;
  int texture_resolution = 0;
  int width = 0;
  int height = 0;
  int frames = 0;
  std::size_t samples_per_frame = 0;
  BenchTiming baseline;
  BenchTiming software;
  BenchTiming atlas;
};

/// Frame times in ms of sort + G-buffer passes along the camera path, one
/// entry per camera and repetition.
std::vector<double> time_gbuffer(const Scene& scene, const std::vector<Camera>& path,
                                 const RasterOptions& opts, int repetitions);

/// Median and 95th percentile of a sample.
double percentile(std::vector<double> values, double q);

/// Baseline (texel 0 only), per-primitive and atlas sampling timed on the
/// same fixed orbit, interleaved frame by frame.
BenchReport bench_sampling(const Scene& scene, const std::vector<Camera>& path, int repetitions,
                           int threads = 1);

/// `splats` random splats on a sphere shell of radius 1 with random T x T textures.
Scene bench_scene(int splats, int texture_resolution, std::uint64_t seed);

/// Fixed camera path around the bench scene.
std::vector<Camera> bench_path(int frames, int width, int height);

} // namespace texsplat
