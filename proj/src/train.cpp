#include "texsplat/train.hpp"

#include "texsplat/losses.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace texsplat {

Objective evaluate_objective(const Scene& scene, const View& view, const LossWeights& weights,
                             const RenderSettings& settings, SceneGradients* grads,
                             RenderOutput* output) {
  const Camera& cam = view.camera;
  RenderOutput fwd = render(scene, cam, settings);
  const ImageLoss img = loss_image(fwd.color, view.target, weights.lambda);
  Objective obj;
  obj.image = img.value;
  RenderUpstream up;
  if (grads != nullptr) {
    up.d_color = img.grad;
  }

  if (weights.normal > 0.0 || weights.smooth > 0.0) {
    const int w = cam.width;
    const int h = cam.height;
    Image n_world(w, h, 3, 0.0);
    Image n_eye(w, h, 3, 0.0);
    Image depth(w, h, 1, 0.0);
    Mask covered(n_world.pixel_count(), 0);
    for (std::size_t p = 0; p < covered.size(); ++p) {
      const ResolvedPixel r = resolve_pixel(fwd.gbuffer, p);
      if (r.alpha > kGeometryAlphaThreshold) {
        covered[p] = 1;
        const Vec3 ne = world_to_eye_normal(cam, r.normal);
        for (int c = 0; c < 3; ++c) {
          n_world.data[p * 3 + c] = r.normal[c];
          n_eye.data[p * 3 + c] = ne[c];
        }
        depth.data[p] = r.depth;
      }
    }
    if (grads != nullptr) {
      up.d_normal = Image(w, h, 3, 0.0);
      up.d_depth = Image(w, h, 1, 0.0);
    }
    if (weights.normal > 0.0) {
      const NormalField field = depth_to_normal(depth, cam);
      const NormalLoss nl = loss_normal(n_eye, field.normals, field.mask);
      obj.normal = nl.value;
      if (grads != nullptr) {
        Image d_field = nl.d_depth_normal;
        for (std::size_t p = 0; p < covered.size(); ++p) {
          const Vec3 d_eye = weights.normal * Vec3(&nl.d_rendered.data[p * 3]);
          const Vec3 d_world = eye_to_world_normal(cam, d_eye);
          for (int c = 0; c < 3; ++c) {
            up.d_normal.data[p * 3 + c] += d_world[c];
            d_field.data[p * 3 + c] *= weights.normal;
          }
        }
        const Image d_depth = depth_to_normal_backward(depth, cam, field, d_field);
        for (std::size_t p = 0; p < covered.size(); ++p) {
          up.d_depth.data[p] += d_depth.data[p];
        }
      }
    }
    if (weights.smooth > 0.0) {
      const SmoothLoss sl = loss_smooth(n_world, to_display(view.target), covered);
      obj.smooth = sl.value;
      if (grads != nullptr) {
        for (std::size_t i = 0; i < sl.d_normal.data.size(); ++i) {
          up.d_normal.data[i] += weights.smooth * sl.d_normal.data[i];
        }
      }
    }
  }
  obj.total = obj.image + weights.normal * obj.normal + weights.smooth * obj.smooth;
  if (grads != nullptr) {
    render_backward(scene, cam, fwd, up, *grads, settings);
  }
  if (output != nullptr) {
    *output = std::move(fwd);
  }
  return obj;
}

double LearningRates::of(ParamClass c, double extent) const {
  switch (c) {
    case ParamClass::Position:
      return position * extent;
    case ParamClass::Frame:
      return frame;
    case ParamClass::Scale:
      return scale;
    case ParamClass::Opacity:
      return opacity;
    case ParamClass::Albedo:
    case ParamClass::Roughness:
    case ParamClass::Metallic:
    case ParamClass::TangentNormal:
      return texels;
    case ParamClass::IndirectSH:
      return sh;
    case ParamClass::Environment:
      return environment;
  }
  return 0.0;
}

void TrainConfig::validate() const {
  if (total_iterations < 2) {
    throw std::invalid_argument("train: need at least two iterations");
  }
  const int b = boundary();
  if (b <= 0 || b >= total_iterations) {
    throw std::invalid_argument("train: stage boundary must lie strictly inside the run");
  }
  if (texture_resolution < 1) {
    throw std::invalid_argument("train: texture resolution must be positive");
  }
  if (ssim_window != kSsimWindow) {
    throw std::invalid_argument("train: only the 11x11 SSIM window is supported");
  }
  for (ParamClass c : kAllParamClasses) {
    if (!(lr.of(c, 1.0) > 0.0)) {
      throw std::invalid_argument("train: learning rates must be positive");
    }
  }
  if (!(lr_final_factor > 0.0)) {
    throw std::invalid_argument("train: lr_final_factor must be positive");
  }
}

double evaluate_psnr(const Scene& scene, const std::vector<View>& views,
                     const RenderSettings& settings) {
  if (views.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const View& v : views) {
    Image a = to_display(render(scene, v.camera, settings).color);
    Image b = to_display(v.target);
    for (double& x : a.data) x = clamp01(x);
    for (double& x : b.data) x = clamp01(x);
    sum += psnr(a, b);
  }
  return sum / static_cast<double>(views.size());
}

double scene_extent(const Dataset& data) {
  std::vector<Vec3> centers;
  for (const auto* list : {&data.train, &data.test}) {
    for (const View& v : *list) {
      centers.push_back(v.camera.center());
    }
  }
  if (centers.empty()) {
    return 1.0;
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& c : centers) mean += c;
  mean /= static_cast<double>(centers.size());
  double radius = 0.0;
  for (const Vec3& c : centers) radius = std::max(radius, (c - mean).norm());
  return radius > 0.0 ? 1.1 * radius : 1.0;
}

std::vector<std::size_t> prune_splats(Scene& scene, double threshold) {
  std::vector<std::size_t> kept;
  std::vector<Splat> splats;
  for (std::size_t i = 0; i < scene.splats.size(); ++i) {
    if (scene.splats[i].opacity >= threshold) {
      kept.push_back(i);
      splats.push_back(scene.splats[i]);
    }
  }
  // Drop texture sets nobody references any more.
  std::vector<int> remap(scene.textures.size(), -1);
  std::vector<MaterialTextureSet> textures;
  for (Splat& s : splats) {
    int& id = remap[s.texture_id];
    if (id < 0) {
      id = static_cast<int>(textures.size());
      textures.push_back(scene.textures[s.texture_id]);
    }
    s.texture_id = id;
  }
  scene.splats = std::move(splats);
  scene.textures = std::move(textures);
  return kept;
}

void project_parameters(Scene& scene) {
  for (Splat& s : scene.splats) {
    orthonormalize_frame(s);
    s.scale_u = std::max(s.scale_u, 1e-6);
    s.scale_v = std::max(s.scale_v, 1e-6);
    s.opacity = clamp01(s.opacity);
  }
  for (MaterialTextureSet& set : scene.textures) {
    for (TextureMap* m : {&set.albedo, &set.roughness, &set.metallic, &set.tangent_normal}) {
      for (float& x : m->texels) {
        x = std::clamp(x, 0.0f, 1.0f);
      }
    }
  }
  for (LatLongMap& level : scene.environment.specular) {
    for (float& x : level.texels) x = std::max(x, 0.0f);
  }
  for (float& x : scene.environment.diffuse.texels) x = std::max(x, 0.0f);
}

namespace {

// Gives every splat its own texture set, in splat order.
void own_textures(Scene& scene) {
  std::vector<MaterialTextureSet> textures;
  textures.reserve(scene.splats.size());
  for (std::size_t i = 0; i < scene.splats.size(); ++i) {
    textures.push_back(scene.textures[scene.splats[i].texture_id]);
    scene.splats[i].texture_id = static_cast<int>(i);
  }
  scene.textures = std::move(textures);
}

bool per_splat_class(ParamClass c) { return c != ParamClass::Environment; }

void compact_state(AdamState& st, std::size_t old_count, const std::vector<std::size_t>& kept) {
  if (st.m.empty() || old_count == 0) {
    return;
  }
  const std::size_t stride = st.m.size() / old_count;
  std::vector<double> m;
  std::vector<double> v;
  m.reserve(kept.size() * stride);
  v.reserve(kept.size() * stride);
  for (std::size_t k : kept) {
    m.insert(m.end(), st.m.begin() + k * stride, st.m.begin() + (k + 1) * stride);
    v.insert(v.end(), st.v.begin() + k * stride, st.v.begin() + (k + 1) * stride);
  }
  st.m = std::move(m);
  st.v = std::move(v);
}

bool contains(const std::vector<ParamClass>& list, ParamClass c) {
  return std::find(list.begin(), list.end(), c) != list.end();
}

} // namespace

TrainResult train(Scene scene, const Dataset& data, const TrainConfig& cfg,
                  const LossWeights& weights, const std::function<void(const LogEntry&)>& on_log) {
  cfg.validate();
  if (!weights.valid()) {
    throw std::invalid_argument("train: invalid loss weights");
  }
  if (data.train.empty()) {
    throw std::invalid_argument("train: dataset has no training views");
  }
  scene.validate();
  own_textures(scene);
  for (MaterialTextureSet& set : scene.textures) {
    if (set.resolution() != 1) {
      set = set.averaged();
    }
  }

  const double extent = scene_extent(data);
  const int boundary = cfg.boundary();
  const std::vector<View>& eval_views = data.test.empty() ? data.train : data.test;
  std::map<ParamClass, AdamState> adam;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> schedule;
  std::size_t cursor = 0;

  TrainResult result;
  for (int it = 0; it < cfg.total_iterations; ++it) {
    const int stage = it < boundary ? 1 : 2;
    if (it == boundary) {
      result.last_stage1_render = render(scene, data.train.front().camera, cfg.render).color;
      if (cfg.texture_resolution > 1) {
        for (MaterialTextureSet& set : scene.textures) {
          set = set.broadcast(cfg.texture_resolution);
        }
      }
      result.first_stage2_render = render(scene, data.train.front().camera, cfg.render).color;
    }
    if (stage == 1 && cfg.prune_interval > 0 && it > 0 && it % cfg.prune_interval == 0) {
      const std::size_t before = scene.splats.size();
      const std::vector<std::size_t> kept = prune_splats(scene, cfg.prune_threshold);
      if (kept.size() != before) {
        for (auto& [c, st] : adam) {
          if (per_splat_class(c)) {
            compact_state(st, before, kept);
          }
        }
      }
    }
    if (cursor == schedule.size()) {
      schedule.resize(data.train.size());
      std::iota(schedule.begin(), schedule.end(), std::size_t{0});
      std::shuffle(schedule.begin(), schedule.end(), rng);
      cursor = 0;
    }
    const View& view = data.train[schedule[cursor++]];

    SceneGradients grads = SceneGradients::zeros_like(scene);
    const Objective obj = evaluate_objective(scene, view, weights, cfg.render, &grads);
    if (!std::isfinite(obj.total)) {
      throw std::runtime_error("train: loss became non-finite at iteration " + std::to_string(it));
    }

    const double progress =
        cfg.total_iterations > 1 ? static_cast<double>(it) / (cfg.total_iterations - 1) : 0.0;
    const double decay = std::pow(cfg.lr_final_factor, progress);
    for (ParamClass c : kAllParamClasses) {
      if (cfg.optimize && !contains(*cfg.optimize, c)) continue;
      if (contains(cfg.frozen, c)) continue;
      if (c == ParamClass::TangentNormal && stage == 1) continue;
      if (c == ParamClass::Position && stage == 2) continue;
      if (c == ParamClass::Environment && !scene.environment.learnable) continue;
      std::vector<double> params = gather_params(scene, c);
      if (params.empty()) continue;
      const std::vector<double> g = gather_grads(grads, c);
      adam[c].update(params, g, cfg.lr.of(c, extent) * decay);
      scatter_params(scene, c, params);
    }
    project_parameters(scene);

    LogEntry entry;
    entry.iteration = it;
    entry.stage = stage;
    entry.loss = obj;
    const bool last = it + 1 == cfg.total_iterations;
    if (last || (cfg.eval_interval > 0 && (it + 1) % cfg.eval_interval == 0)) {
      entry.test_psnr = evaluate_psnr(scene, eval_views, cfg.render);
      if (last) {
        result.final_test_psnr = *entry.test_psnr;
      }
    }
    result.log.push_back(entry);
    if (on_log) {
      on_log(entry);
    }
  }
  result.scene = std::move(scene);
  return result;
}

std::string log_to_csv(const std::vector<LogEntry>& log) {
  std::ostringstream out;
  out.precision(10);
  out << "iteration,stage,total,image,normal,smooth,test_psnr\n";
  for (const LogEntry& e : log) {
    out << e.iteration << ',' << e.stage << ',' << e.loss.total << ',' << e.loss.image << ','
        << e.loss.normal << ',' << e.loss.smooth << ',';
    if (e.test_psnr) {
      out << *e.test_psnr;
    }
    out << '\n';
  }
  return out.str();
}

} // namespace texsplat
