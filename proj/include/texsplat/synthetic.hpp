#pragma once

#include "texsplat/train.hpp"

#include <cstdint>
#include <vector>

namespace texsplat {

/// Sky gradient with a warm sun lobe; z is up.
LatLongMap procedural_sky(int width, int height);

/// Small prefiltered environment built from procedural_sky.
EnvironmentLight synthetic_environment(int width = 64, int height = 32, int levels = 4);

struct RandomSceneOptions {
  int splats = 8;
  int texture_resolution = 4;
  int sh_degree = 1;
  std::uint64_t seed = 0;
  /// Centers are drawn uniformly in a cube of this half-size around the origin.
  double spread = 0.6;
  double min_scale = 0.15;
  double max_scale = 0.35;
  bool random_textures = true;
};

/// Randomly posed, randomly textured splats with their own texture sets.
Scene random_scene(const RandomSceneOptions& opts);

/// Ground-truth object for fitting experiments: `count` splats tiling a
/// sphere of `radius`, each with a distinct albedo pattern and bumpy
/// tangent normals at T = `texture_resolution`.
Scene textured_sphere_scene(int count, double radius, int texture_resolution, std::uint64_t seed);

/// Cameras on a ring at `elevation` radians, looking at the origin.
std::vector<Camera> orbit_cameras(int count, double distance, double elevation, int width,
                                  int height, double focal);

/// Renders each camera; views whose index is in `test_indices` go to the test split.
Dataset render_dataset(const Scene& scene, const std::vector<Camera>& cameras,
                       const std::vector<int>& test_indices, const RenderSettings& settings = {});

/// Design-decision initial attributes around known surface points: gray
/// albedo 0.5, roughness 0.5, metallic 0, neutral tangent normals,
/// opacity 0.5 and a constant 0.5 environment of the given shape.
Scene initialize_scene(const std::vector<Vec3>& points, const std::vector<Vec3>& normals,
                       double scale, const EnvironmentLight& env_shape, int sh_degree = 1);

/// Uniform sphere-shell points and their outward normals.
void sphere_shell(int count, double radius, std::uint64_t seed, std::vector<Vec3>& points,
                  std::vector<Vec3>& normals);

} // namespace texsplat
