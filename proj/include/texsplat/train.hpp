#pragma once

#include "texsplat/gradients.hpp"
#include "texsplat/optimizer.hpp"
#include "texsplat/render.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace texsplat {

struct LossWeights {
  double lambda = 0.2;
  double normal = 0.05;
  double smooth = 0.02;

  bool valid() const { return lambda >= 0.0 && lambda <= 1.0 && normal >= 0.0 && smooth >= 0.0; }
};

/// One posed image; targets are linear RGB.
struct View {
  Camera camera;
  Image target;
};

struct Dataset {
  std::vector<View> train;
  std::vector<View> test;
};

struct Objective {
  double total = 0.0;
  double image = 0.0;
  double normal = 0.0;
  double smooth = 0.0;
};

/// Coverage above which pixels take part in the geometric losses.
inline constexpr double kGeometryAlphaThreshold = 0.5;

/// Composite loss of one view; accumulates its gradient into `grads` when given.
Objective evaluate_objective(const Scene& scene, const View& view, const LossWeights& weights,
                             const RenderSettings& settings, SceneGradients* grads = nullptr,
                             RenderOutput* output = nullptr);

struct LearningRates {
  double position = 1.6e-4;  // multiplied by the scene extent
  double frame = 1e-3;
  double scale = 1e-3;
  double opacity = 5e-2;
  double texels = 2.5e-3;
  double sh = 2.5e-3;
  double environment = 1e-2;

  double of(ParamClass c, double extent) const;
};

struct TrainConfig {
  int total_iterations = 2000;
  /// Stage-1 length; total / 2 when unset.
  std::optional<int> stage_boundary;
  /// Stage-2 texture resolution. 1 keeps the constant-attribute model.
  int texture_resolution = 4;
  LearningRates lr;
  /// Learning rates decay exponentially to this fraction at the last iteration.
  double lr_final_factor = 1.0;
  int ssim_window = 11;
  std::uint64_t seed = 0;
  /// When set, only these classes are optimized.
  std::optional<std::vector<ParamClass>> optimize;
  std::vector<ParamClass> frozen;
  int prune_interval = 500;
  double prune_threshold = 0.005;
  /// Held-out PSNR is logged every `eval_interval` iterations and at the end.
  int eval_interval = 100;
  RenderSettings render;

  int boundary() const { return stage_boundary.value_or(total_iterations / 2); }
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct LogEntry {
  int iteration = 0;
  int stage = 1;
  Objective loss;
  std::optional<double> test_psnr;
};

struct TrainResult {
  Scene scene;
  std::vector<LogEntry> log;
  /// Renders of the first training view just before and just after the
  /// stage transition.
  Image last_stage1_render;
  Image first_stage2_render;
  double final_test_psnr = 0.0;
};

/// Mean display-space PSNR over views (clamped to [0, 1]).
double evaluate_psnr(const Scene& scene, const std::vector<View>& views,
                     const RenderSettings& settings = {});

/// Radius of the camera centers around their mean, times 1.1; 1 when the
/// centers coincide.
double scene_extent(const Dataset& data);

/// Removes splats with opacity below `threshold`; returns the kept indices.
std::vector<std::size_t> prune_splats(Scene& scene, double threshold);

/// Gram-Schmidt frames, positive scales, opacity and texels in [0, 1],
/// non-negative lighting.
void project_parameters(Scene& scene);

/// Two-stage fit. Stage 1 works on T = 1 textures with tangent normals
/// frozen; stage 2 broadcasts to the configured resolution and freezes
/// positions. Throws std::runtime_error when the loss stops being finite.
TrainResult train(Scene scene, const Dataset& data, const TrainConfig& cfg,
                  const LossWeights& weights = {},
                  const std::function<void(const LogEntry&)>& on_log = {});

/// CSV text: iteration,stage,total,image,normal,smooth,test_psnr.
std::string log_to_csv(const std::vector<LogEntry>& log);

} // namespace texsplat
