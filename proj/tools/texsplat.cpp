#include "texsplat/bench.hpp"
#include "texsplat/gradcheck.hpp"
#include "texsplat/io.hpp"
#include "texsplat/losses.hpp"
#include "texsplat/parallel.hpp"
#include "texsplat/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace texsplat;
using json = nlohmann::json;

namespace {

struct Flags {
  std::string scene;
  std::string manifest;
  std::string out = ".";
  std::string config;
  bool atlas = false;
  bool decompose = false;
  std::optional<int> texture_res;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> iterations;
  std::optional<int> splats;
  int frames = 8;
  int repetitions = 2;
  int width = 128;
  int max_dim = kDefaultAtlasMaxDim;
  double epsilon = GradcheckOptions{}.epsilon;
};

void require(const std::string& value, const char* flag, const char* command) {
  if (value.empty()) {
    throw CLI::ValidationError(std::string(command) + " needs " + flag);
  }
}

Image channel_image(const GBuffer& g, int channel, int count) {
  Image img(g.width, g.height, 3);
  for (std::size_t p = 0; p < g.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      img.data[p * 3 + c] = clamp01(g.pixel(p)[channel + (count == 3 ? c : 0)]);
    }
  }
  return img;
}

int cmd_render(const Flags& f) {
  require(f.scene, "--scene", "render");
  if (f.manifest.empty()) {
    throw std::invalid_argument("render: no camera; pass --manifest");
  }
  const Scene scene = load_scene(f.scene);
  const Manifest manifest = load_manifest(f.manifest);
  if (manifest.frames.empty()) {
    throw std::invalid_argument("render: manifest has no frames");
  }
  std::optional<AtlasSet> atlas;
  RenderSettings settings;
  if (f.atlas && !scene.textures.empty()) {
    atlas = pack_atlases(scene.textures);
    settings.raster.material = MaterialMode::Atlas;
    settings.raster.atlas = &*atlas;
  }
  const fs::path out(f.out);
  fs::create_directories(out);
  json written = json::array();
  auto emit_png = [&](const fs::path& p, const Image& img) {
    write_png(p, img);
    written.push_back(p.string());
  };
  for (const ManifestFrame& frame : manifest.frames) {
    const std::string stem = fs::path(frame.file_path).stem().string();
    const RenderOutput r = render(scene, frame.camera, settings);
    if (f.decompose) {
      emit_png(out / (stem + "_albedo.png"), channel_image(r.gbuffer, gb::kAlbedo, 3));
      emit_png(out / (stem + "_normal.png"), render_normal_map(r.gbuffer, frame.camera));
      emit_png(out / (stem + "_roughness.png"), channel_image(r.gbuffer, gb::kRoughness, 1));
      emit_png(out / (stem + "_metallic.png"), channel_image(r.gbuffer, gb::kMetallic, 1));
      emit_png(out / (stem + "_diffuse.png"), to_display(r.diffuse));
      emit_png(out / (stem + "_specular.png"), to_display(r.specular));
      emit_png(out / (stem + "_final.png"), to_display(r.color));
    } else {
      const fs::path pfm = out / (stem + ".pfm");
      write_pfm(pfm, r.color);
      written.push_back(pfm.string());
      emit_png(out / (stem + ".png"), to_display(r.color));
    }
  }
  std::cout << json{{"command", "render"},
                    {"splats", scene.splats.size()},
                    {"frames", manifest.frames.size()},
                    {"atlas", f.atlas},
                    {"images", written}}
                   .dump(2)
            << '\n';
  return 0;
}

Scene initial_fit_scene(const Dataset& data, const FitInit& init, std::uint64_t seed) {
  double mean_distance = 0.0;
  std::size_t n = 0;
  for (const auto* views : {&data.train, &data.test}) {
    for (const View& v : *views) {
      mean_distance += v.camera.center().norm();
      ++n;
    }
  }
  mean_distance /= static_cast<double>(std::max<std::size_t>(n, 1));
  const double radius = init.radius.value_or(0.3 * mean_distance);
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  sphere_shell(init.splats, radius, seed, points, normals);
  const double scale = 2.5 * radius / std::sqrt(static_cast<double>(std::max(init.splats, 1)));
  return initialize_scene(points, normals, scale, synthetic_environment(), init.sh_degree);
}

int cmd_fit(const Flags& f) {
  require(f.manifest, "--manifest", "fit");
  TrainConfig cfg;
  LossWeights weights;
  FitInit init;
  if (!f.config.empty()) {
    load_train_config(f.config, cfg, weights, &init);
  }
  if (f.texture_res) cfg.texture_resolution = *f.texture_res;
  if (f.seed) cfg.seed = *f.seed;
  if (f.iterations) {
    cfg.total_iterations = *f.iterations;
    cfg.stage_boundary.reset();
  }
  if (f.splats) init.splats = *f.splats;
  const Dataset data = load_dataset(f.manifest);
  const Scene start = f.scene.empty() ? initial_fit_scene(data, init, cfg.seed) : load_scene(f.scene);

  const TrainResult result = train(start, data, cfg, weights, [](const LogEntry& e) {
    if (e.test_psnr) {
      std::cerr << "iter " << e.iteration << " stage " << e.stage << " loss " << e.loss.total
                << " psnr " << *e.test_psnr << '\n';
    }
  });
  const fs::path out(f.out);
  fs::create_directories(out);
  const fs::path checkpoint = out / "checkpoint.json";
  save_scene(checkpoint, result.scene);
  {
    std::ofstream log(out / "log.csv");
    log << log_to_csv(result.log);
  }
  const Objective& last = result.log.back().loss;
  std::cout << json{{"command", "fit"},
                    {"iterations", cfg.total_iterations},
                    {"stage_boundary", cfg.boundary()},
                    {"texture_resolution", cfg.texture_resolution},
                    {"seed", cfg.seed},
                    {"splats", result.scene.splats.size()},
                    {"final_loss", last.total},
                    {"final_psnr", result.final_test_psnr},
                    {"psnr_views", data.test.empty() ? "train" : "test"},
                    {"stage_invariant", result.last_stage1_render == result.first_stage2_render},
                    {"checkpoint", checkpoint.string()},
                    {"log", (out / "log.csv").string()}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_gradcheck(const Flags& f) {
  require(f.scene, "--scene", "gradcheck");
  require(f.manifest, "--manifest", "gradcheck");
  const Scene scene = load_scene(f.scene);
  const Dataset data = load_dataset(f.manifest);
  const View& view = data.train.empty() ? data.test.at(0) : data.train.front();
  GradcheckOptions opts;
  opts.epsilon = f.epsilon;
  opts.seed = f.seed.value_or(0);
  if (!f.config.empty()) {
    TrainConfig cfg;
    load_train_config(f.config, cfg, opts.weights);
  }
  const GradcheckReport report = gradcheck(scene, view, opts);
  json classes = json::object();
  for (const ClassReport& c : report.classes) {
    classes[std::string(to_string(c.cls))] = {{"max_rel_error", c.max_rel_error},
                                              {"threshold", c.threshold},
                                              {"checked", c.checked},
                                              {"params", c.param_count},
                                              {"pass", c.pass()}};
  }
  std::cout << json{{"command", "gradcheck"},
                    {"epsilon", opts.epsilon},
                    {"loss", report.loss},
                    {"classes", classes},
                    {"pass", report.pass()}}
                   .dump(2)
            << '\n';
  return report.pass() ? 0 : 1;
}

int cmd_pack_atlas(const Flags& f) {
  require(f.scene, "--scene", "pack-atlas");
  const Scene scene = load_scene(f.scene);
  const AtlasSet atlas = pack_atlases(scene.textures, f.max_dim);
  write_atlas(f.out, atlas);
  std::cout << json{{"command", "pack-atlas"},
                    {"splats", scene.splats.size()},
                    {"texture_sets", atlas.indirection.size()},
                    {"chart_size", atlas.chart_size},
                    {"charts_x", atlas.capacity_x},
                    {"charts_y", atlas.capacity_y},
                    {"pages", atlas.page_count()},
                    {"out", f.out}}
                   .dump(2)
            << '\n';
  return 0;
}

json timing_json(const BenchTiming& t) {
  return {{"median_ms", t.median_ms},
          {"p95_ms", t.p95_ms},
          {"fps", t.fps},
          {"ns_per_sample", t.ns_per_sample},
          {"ratio", t.ratio}};
}

int cmd_bench_atlas(const Flags& f) {
  const Scene scene = f.scene.empty()
                          ? bench_scene(f.splats.value_or(10000), f.texture_res.value_or(16),
                                        f.seed.value_or(0))
                          : load_scene(f.scene);
  const std::vector<Camera> path = bench_path(f.frames, f.width, f.width);
  const BenchReport r = bench_sampling(scene, path, f.repetitions, default_thread_count());
  std::cout << json{{"command", "bench-atlas"},
                    {"splats", r.splats},
                    {"texture_resolution", r.texture_resolution},
                    {"width", r.width},
                    {"height", r.height},
                    {"frames", r.frames},
                    {"samples_per_frame", r.samples_per_frame},
                    {"baseline", timing_json(r.baseline)},
                    {"software", timing_json(r.software)},
                    {"atlas", timing_json(r.atlas)},
                    {"atlas_ge_software", r.atlas.ratio >= r.software.ratio}}
                   .dump(2)
            << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Textured 2D Gaussian splat renderer and optimizer"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--scene", f.scene, "Scene file (JSON header)");
    sub->add_option("--manifest", f.manifest, "Camera / dataset manifest");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_flag("--atlas", f.atlas, "Sample materials through packed atlases");
    sub->add_flag("--decompose", f.decompose, "Write per-buffer decomposition images");
    sub->add_option("--texture-res", f.texture_res, "Texture resolution T");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--threads", f.threads, "Worker threads (default: TEXSPLAT_THREADS)");
    sub->add_option("--config", f.config, "JSON config file");
  };
  CLI::App* render_cmd = app.add_subcommand("render", "Render a scene for every manifest camera");
  CLI::App* fit_cmd = app.add_subcommand("fit", "Two-stage fit of a scene to a dataset");
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  CLI::App* pack_cmd = app.add_subcommand("pack-atlas", "Pack texture atlases and export them");
  CLI::App* bench_cmd = app.add_subcommand("bench-atlas", "Time baseline, software and atlas sampling");
  for (CLI::App* sub : {render_cmd, fit_cmd, grad_cmd, pack_cmd, bench_cmd}) {
    common(sub);
  }
  fit_cmd->add_option("--iterations", f.iterations, "Total iterations");
  fit_cmd->add_option("--splats", f.splats, "Splats of the sphere-shell initialization");
  grad_cmd->add_option("--epsilon", f.epsilon, "Central-difference step");
  pack_cmd->add_option("--max-dim", f.max_dim, "Maximum atlas page dimension");
  bench_cmd->add_option("--splats", f.splats, "Splats of the generated bench scene");
  bench_cmd->add_option("--frames", f.frames, "Cameras on the orbit");
  bench_cmd->add_option("--repetitions", f.repetitions, "Passes over the orbit");
  bench_cmd->add_option("--width", f.width, "Image width and height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_default_thread_count(resolve_thread_count(f.threads));
    if (render_cmd->parsed()) return cmd_render(f);
    if (fit_cmd->parsed()) return cmd_fit(f);
    if (grad_cmd->parsed()) return cmd_gradcheck(f);
    if (pack_cmd->parsed()) return cmd_pack_atlas(f);
    if (bench_cmd->parsed()) return cmd_bench_atlas(f);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "texsplat: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "texsplat: " << e.what() << '\n';
    return 3;
  } catch (const MissingReferenceError& e) {
    std::cerr << "texsplat: " << e.what() << '\n';
    return 4;
  } catch (const VersionError& e) {
    std::cerr << "texsplat: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "texsplat: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
