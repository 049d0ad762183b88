#pragma once

#include "texsplat/atlas.hpp"
#include "texsplat/image.hpp"
#include "texsplat/train.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace texsplat {

namespace fs = std::filesystem;

/// Malformed file contents: bad magic, missing fields, inconsistent counts.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error("schema violation: " + what) {}
};

/// A file named by another file does not exist.
struct MissingReferenceError : std::runtime_error {
  explicit MissingReferenceError(const std::string& what)
      : std::runtime_error("missing reference: " + what) {}
};

struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& what)
      : std::runtime_error("version mismatch: " + what) {}
};

/// Open, read or write failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error("i/o error: " + what) {}
};

inline constexpr int kSceneVersion = 1;

/// Portable float map, little-endian, 1 or 3 channels. Rows are stored
/// bottom-up on disk; in memory row 0 is the top.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> data;
};

void write_pfm(const fs::path& path, const FloatImage& img);
FloatImage read_pfm(const fs::path& path);
void write_pfm(const fs::path& path, const Image& img);
Image read_pfm_image(const fs::path& path);

/// 8-bit RGB PNG of display-space values clamped to [0, 1].
void write_png(const fs::path& path, const Image& display);
/// Display-space values in [0, 1].
Image read_png(const fs::path& path);

/// Triangles only; polygons with more than three vertices are rejected.
std::vector<Triangle> read_obj(const fs::path& path);
void write_obj(const fs::path& path, const std::vector<Triangle>& triangles);

LatLongMap to_latlong(const FloatImage& img);
FloatImage from_latlong(const LatLongMap& map);

/// JSON header at `path` plus sidecar files next to it that share its stem:
/// <stem>.splats.bin, <stem>.textures.bin, <stem>.env_spec_L<l>.pfm,
/// <stem>.env_diffuse.pfm and, when present, <stem>.mesh.obj.
void save_scene(const fs::path& path, const Scene& scene);
Scene load_scene(const fs::path& path);

/// Transforms-style manifest: shared intrinsics (w, h, fl_x, fl_y, cx, cy,
/// near, far) and frames with file_path, an OpenGL-convention camera-to-world
/// transform_matrix and split ("train" or "test").
struct ManifestFrame {
  std::string file_path;
  Camera camera;
  bool test = false;
};

struct Manifest {
  int width = 0;
  int height = 0;
  std::vector<ManifestFrame> frames;
};

Manifest load_manifest(const fs::path& path);
void save_manifest(const fs::path& path, const Manifest& manifest);
/// Loads the manifest and its images (PFM as linear, PNG as sRGB).
Dataset load_dataset(const fs::path& path);

/// Camera-to-world in OpenGL axes (x right, y up, z backward).
Mat4 camera_to_world_gl(const Camera& camera);
Camera camera_from_gl(const Mat4& c2w, int width, int height, double fx, double fy, double cx,
                      double cy, double near_plane, double far_plane);

/// Page files atlas_<family>_p<page>_rgb.pfm (and _a.pfm for roughness),
/// indirection.json mapping splat id to [page, cx, cy], and a PNG preview
/// of the first albedo page.
void write_atlas(const fs::path& dir, const AtlasSet& atlases);

/// Sphere-shell initialization used by `fit` when no starting scene is given.
struct FitInit {
  int splats = 256;
  /// Defaults to 0.3 times the mean camera distance from the origin.
  std::optional<double> radius;
  int sh_degree = 1;
};

/// Overrides fields of `cfg`, `weights` and `init` (when given) from a JSON
/// config file. Unknown keys are schema violations.
void load_train_config(const fs::path& path, TrainConfig& cfg, LossWeights& weights,
                       FitInit* init = nullptr);

} // namespace texsplat
