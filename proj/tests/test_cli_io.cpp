#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace texsplat;
using namespace testing;
using json = nlohmann::json;

namespace {

const char* kBundles[] = {"toy", "sphere", "single", "empty"};

Scene hundred_splats() {
  RandomSceneOptions o;
  o.splats = 100;
  o.texture_resolution = 4;
  o.sh_degree = 2;
  o.seed = 21;
  Scene s = random_scene(o);
  s.mesh = ceiling(2.0);
  s.background = Vec3(0.1, 0.2, 0.3);
  return s;
}

void check_same_scene(const Scene& a, const Scene& b) {
  REQUIRE(a.splats.size() == b.splats.size());
  for (std::size_t k = 0; k < a.splats.size(); ++k) {
    const Splat& x = a.splats[k];
    const Splat& y = b.splats[k];
    CHECK(x.position == y.position);
    CHECK(x.tangent_u == y.tangent_u);
    CHECK(x.tangent_v == y.tangent_v);
    CHECK(x.scale_u == y.scale_u);
    CHECK(x.scale_v == y.scale_v);
    CHECK(x.opacity == y.opacity);
    CHECK(x.texture_id == y.texture_id);
    CHECK(x.indirect_sh == y.indirect_sh);
  }
  CHECK(a.textures == b.textures);
  CHECK(a.texture_config.resolution == b.texture_config.resolution);
  CHECK(a.texture_config.support == b.texture_config.support);
  CHECK(a.environment == b.environment);
  CHECK(a.background == b.background);
  REQUIRE(static_cast<bool>(a.mesh) == static_cast<bool>(b.mesh));
  if (a.mesh) {
    REQUIRE(a.mesh->triangles().size() == b.mesh->triangles().size());
    for (std::size_t k = 0; k < a.mesh->triangles().size(); ++k) {
      CHECK(a.mesh->triangles()[k].v0 == b.mesh->triangles()[k].v0);
      CHECK(a.mesh->triangles()[k].v2 == b.mesh->triangles()[k].v2);
    }
  }
}

template <typename E>
std::string error_of(const fs::path& p) {
  try {
    load_scene(p);
  } catch (const E& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("wrong error: ") + e.what();
  }
  return "no error";
}

void rewrite_header(const fs::path& p, const std::function<void(json&)>& edit) {
  json j = json::parse(read_text(p));
  edit(j);
  std::ofstream(p) << j.dump(2);
}

json parse_stdout(const RunResult& r) {
  try {
    return json::parse(r.out);
  } catch (const std::exception&) {
    return json();
  }
}

} // namespace

TEST_CASE("pfm round trip") {
  const fs::path dir = scratch_dir("pfm");
  FloatImage img{5, 3, 3, {}};
  for (int k = 0; k < 45; ++k) img.data.push_back(0.1f * k - 1.0f);
  write_pfm(dir / "a.pfm", img);
  const FloatImage back = read_pfm(dir / "a.pfm");
  CHECK(back.width == 5);
  CHECK(back.height == 3);
  CHECK(back.data == img.data);
  const std::string raw = read_text(dir / "a.pfm");
  CHECK(raw.rfind("PF\n5 3\n-1", 0) == 0);

  FloatImage gray{2, 2, 1, {1.0f, 2.0f, 3.0f, 4.0f}};
  write_pfm(dir / "g.pfm", gray);
  CHECK(read_pfm(dir / "g.pfm").data == gray.data);
  CHECK(read_pfm(dir / "g.pfm").channels == 1);

  // Bottom-up storage: the last row in memory comes first on disk.
  float first;
  const std::string g = read_text(dir / "g.pfm");
  std::memcpy(&first, g.data() + g.size() - 16, 4);
  CHECK(first == 3.0f);

  std::ofstream(dir / "bad.pfm") << "P6\n1 1\n255\n";
  CHECK_THROWS_AS(read_pfm(dir / "bad.pfm"), SchemaError);
  CHECK_THROWS_AS(read_pfm(dir / "none.pfm"), MissingReferenceError);
}

TEST_CASE("png round trip") {
  const fs::path dir = scratch_dir("png");
  Image img(4, 3, 3);
  for (std::size_t k = 0; k < img.data.size(); ++k) img.data[k] = k / 40.0;
  img.data[0] = 1.5;
  write_png(dir / "a.png", img);
  const Image back = read_png(dir / "a.png");
  REQUIRE(back.same_shape(img));
  for (std::size_t k = 0; k < img.data.size(); ++k) CHECK(std::abs(back.data[k] - clamp01(img.data[k])) <= 0.5 / 255 + 1e-12);
}

TEST_CASE("obj round trip") {
  const fs::path dir = scratch_dir("obj");
  const std::vector<Triangle> tris = {{Vec3(0.1, 0.2, 0.3), Vec3(1.0 / 3, 2, 3), Vec3(-1, -2, 1e-9)}};
  write_obj(dir / "m.obj", tris);
  const std::vector<Triangle> back = read_obj(dir / "m.obj");
  REQUIRE(back.size() == 1);
  CHECK(back[0].v1 == tris[0].v1);
  CHECK(back[0].v2 == tris[0].v2);
  std::ofstream(dir / "quad.obj") << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  CHECK_THROWS_AS(read_obj(dir / "quad.obj"), SchemaError);
  std::ofstream(dir / "dangling.obj") << "v 0 0 0\nf 1 2 3\n";
  CHECK_THROWS_AS(read_obj(dir / "dangling.obj"), SchemaError);
  std::ofstream(dir / "garbled.obj") << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 x 3\n";
  CHECK_THROWS_AS(read_obj(dir / "garbled.obj"), SchemaError);
}

TEST_CASE("latlong conversion") {
  const LatLongMap m = procedural_sky(8, 4);
  CHECK(to_latlong(from_latlong(m)) == m);
}

TEST_CASE("100-splat scene round trip is bitwise") {
  const fs::path dir = scratch_dir("roundtrip");
  const Scene s = hundred_splats();
  save_scene(dir / "scene.json", s);
  for (const char* f : {"scene.splats.bin", "scene.textures.bin", "scene.env_diffuse.pfm", "scene.mesh.obj"}) {
    CHECK(fs::exists(dir / f));
  }
  const Scene back = load_scene(dir / "scene.json");
  check_same_scene(s, back);
  save_scene(dir / "again.json", back);
  CHECK(same_bytes(dir / "scene.splats.bin", dir / "again.splats.bin"));
  CHECK(same_bytes(dir / "scene.textures.bin", dir / "again.textures.bin"));
}

TEST_CASE("scene file errors") {
  const fs::path dir = scratch_dir("errors");
  const Scene s = hundred_splats();

  save_scene(dir / "a.json", s);
  fs::remove(dir / "a.textures.bin");
  CHECK(error_of<MissingReferenceError>(dir / "a.json").rfind("missing reference", 0) == 0);

  save_scene(dir / "b.json", s);
  rewrite_header(dir / "b.json", [](json& j) { j["magic"] = "not-a-scene"; });
  CHECK(error_of<SchemaError>(dir / "b.json").rfind("schema violation", 0) == 0);

  save_scene(dir / "c.json", s);
  rewrite_header(dir / "c.json", [](json& j) { j["version"] = kSceneVersion + 1; });
  CHECK(error_of<VersionError>(dir / "c.json").rfind("version mismatch", 0) == 0);

  save_scene(dir / "d.json", s);
  {
    std::fstream f(dir / "d.textures.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK(error_of<SchemaError>(dir / "d.json").rfind("schema violation", 0) == 0);

  save_scene(dir / "e.json", s);
  rewrite_header(dir / "e.json", [](json& j) { j["splats"]["count"] = 99; });
  CHECK(error_of<SchemaError>(dir / "e.json").rfind("schema violation", 0) == 0);

  save_scene(dir / "f.json", s);
  fs::remove(dir / "f.mesh.obj");
  CHECK(error_of<MissingReferenceError>(dir / "f.json").rfind("missing reference", 0) == 0);

  std::ofstream(dir / "g.json") << "{ not json";
  CHECK(error_of<SchemaError>(dir / "g.json").rfind("schema violation", 0) == 0);
  CHECK(error_of<MissingReferenceError>(dir / "nothing.json").rfind("missing reference", 0) == 0);
}

TEST_CASE("camera conventions") {
  const Camera cam = Camera::look_at(Vec3(1, -2, 0.5), Vec3::Zero(), Vec3::UnitZ(), 30, 20, 10);
  const Mat4 c2w = camera_to_world_gl(cam);
  CHECK((c2w.topRightCorner<3, 1>() - cam.center()).norm() < 1e-12);
  // OpenGL cameras look down their -z axis.
  const Vec3 forward = -c2w.block<3, 1>(0, 2);
  CHECK((forward - (-cam.center()).normalized()).norm() < 1e-12);
  const Camera back = camera_from_gl(c2w, 20, 10, 30, 30, 10, 5, 0.01, 100);
  CHECK((back.world_to_view - cam.world_to_view).norm() < 1e-12);
}

TEST_CASE("manifest and dataset") {
  const fs::path dir = scratch_dir("manifest");
  Manifest m;
  m.width = 6;
  m.height = 4;
  const Camera cam = Camera::look_at(Vec3(0, -2, 0), Vec3::Zero(), Vec3::UnitZ(), 5, 6, 4);
  m.frames = {{"a.pfm", cam, false}, {"b.png", cam, true}};
  save_manifest(dir / "manifest.json", m);
  const Manifest back = load_manifest(dir / "manifest.json");
  REQUIRE(back.frames.size() == 2);
  CHECK(back.frames[1].test);
  CHECK((back.frames[0].camera.world_to_view - cam.world_to_view).norm() < 1e-12);
  CHECK(back.frames[0].camera.fx == 5.0);

  Image img(6, 4, 3, 0.25);
  write_pfm(dir / "a.pfm", img);
  write_png(dir / "b.png", to_display(img));
  const Dataset d = load_dataset(dir / "manifest.json");
  REQUIRE(d.train.size() == 1);
  REQUIRE(d.test.size() == 1);
  CHECK(d.train[0].target == img);
  CHECK(d.test[0].target.at(0, 0, 0) == doctest::Approx(0.25).epsilon(0.02));

  write_pfm(dir / "a.pfm", Image(5, 4, 3));
  CHECK_THROWS_AS(load_dataset(dir / "manifest.json"), SchemaError);
  fs::remove(dir / "a.pfm");
  CHECK_THROWS_AS(load_dataset(dir / "manifest.json"), MissingReferenceError);

  json j = json::parse(read_text(dir / "manifest.json"));
  j["frames"][0]["transform_matrix"][0][0] = 2.0;
  std::ofstream(dir / "skew.json") << j.dump();
  CHECK_THROWS_AS(load_manifest(dir / "skew.json"), SchemaError);
}

TEST_CASE("train config file") {
  const fs::path dir = scratch_dir("config");
  std::ofstream(dir / "cfg.json") << R"({"iterations": 120, "texture_resolution": 8, "lambda_normal": 0.1,
    "lr": {"texels": 0.01}, "frozen": ["scale"], "init_splats": 64})";
  TrainConfig cfg;
  LossWeights w;
  FitInit init;
  load_train_config(dir / "cfg.json", cfg, w, &init);
  CHECK(cfg.total_iterations == 120);
  CHECK(cfg.texture_resolution == 8);
  CHECK(w.normal == 0.1);
  CHECK(cfg.lr.texels == 0.01);
  CHECK(cfg.frozen == std::vector<ParamClass>{ParamClass::Scale});
  CHECK(init.splats == 64);
  std::ofstream(dir / "bad.json") << R"({"iterationz": 5})";
  CHECK_THROWS_AS(load_train_config(dir / "bad.json", cfg, w), SchemaError);
}

TEST_CASE("atlas export") {
  const fs::path dir = scratch_dir("atlas_export");
  const Scene s = hundred_splats();
  const AtlasSet a = pack_atlases(s.textures, 32);
  write_atlas(dir, a);
  CHECK(fs::exists(dir / "atlas_A_p0_rgb.pfm"));
  CHECK(fs::exists(dir / "atlas_A_p0_a.pfm"));
  CHECK(fs::exists(dir / "atlas_B_p1_rgb.pfm"));
  CHECK(fs::exists(dir / "atlas_A_p0_preview.png"));
  const json ind = json::parse(read_text(dir / "indirection.json"));
  CHECK(ind.size() == 100);
  CHECK(ind["99"] == json::array({1, 3, 4}));
}

TEST_CASE("bundled scenes load") {
  for (const char* b : kBundles) {
    CAPTURE(b);
    CHECK_NOTHROW(load_scene(data_dir() / b / "scene.json").validate());
    CHECK_NOTHROW(load_dataset(data_dir() / b / "manifest.json"));
  }
}

TEST_CASE("render --decompose writes seven images") {
  const fs::path out = scratch_dir("decompose");
  const fs::path d = data_dir() / "single";
  const RunResult r = run_cli("render --scene " + (d / "scene.json").string() + " --manifest " +
                              (d / "manifest.json").string() + " --decompose --out " + out.string());
  REQUIRE(r.status == 0);
  CHECK(parse_stdout(r)["images"].size() == 7);
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(out)) pngs += e.path().extension() == ".png";
  CHECK(pngs == 7);
  for (const char* s : {"albedo", "normal", "roughness", "metallic", "diffuse", "specular", "final"}) {
    CHECK(fs::exists(out / (std::string("view_") + s + ".png")));
  }
}

TEST_CASE("render --atlas matches the default path on every bundled scene") {
  for (const char* b : kBundles) {
    CAPTURE(b);
    const fs::path d = data_dir() / b;
    const fs::path plain = scratch_dir(std::string("plain_") + b);
    const fs::path atlas = scratch_dir(std::string("atlas_") + b);
    const std::string args = "render --scene " + (d / "scene.json").string() + " --manifest " +
                             (d / "manifest.json").string();
    REQUIRE(run_cli(args + " --out " + plain.string()).status == 0);
    REQUIRE(run_cli(args + " --atlas --out " + atlas.string()).status == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(plain)) {
      CHECK(same_bytes(e.path(), atlas / e.path().filename()));
      ++files;
    }
    CHECK(files > 0);
  }
}

TEST_CASE("empty scene renders the background") {
  const fs::path out = scratch_dir("empty");
  const fs::path d = data_dir() / "empty";
  REQUIRE(run_cli("render --scene " + (d / "scene.json").string() + " --manifest " +
                  (d / "manifest.json").string() + " --out " + out.string())
              .status == 0);
  const Image img = read_pfm_image(out / "view.pfm");
  const Vec3 bg(0.2f, 0.3f, 0.4f);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) CHECK((img.rgb(x, y) - bg).norm() < 1e-7);
  }
}

TEST_CASE("renders are identical across thread counts") {
  const fs::path d = data_dir() / "sphere";
  const std::string args = "render --scene " + (d / "scene.json").string() + " --manifest " +
                           (d / "manifest.json").string();
  const fs::path a = scratch_dir("threads1"), b = scratch_dir("threads8"), c = scratch_dir("threads_env");
  REQUIRE(run_cli(args + " --threads 1 --out " + a.string()).status == 0);
  REQUIRE(run_cli(args + " --threads 8 --out " + b.string()).status == 0);
  REQUIRE(run_cli(args + " --out " + c.string(), "TEXSPLAT_THREADS=3").status == 0);
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK(same_bytes(e.path(), b / e.path().filename()));
    CHECK(same_bytes(e.path(), c / e.path().filename()));
  }
}

TEST_CASE("cli errors") {
  const fs::path out = scratch_dir("cli_errors");
  const fs::path d = data_dir() / "single";
  RunResult r = run_cli("render --scene " + (d / "scene.json").string() + " --out " + out.string(), "",
                        (out / "err.txt").string());
  CHECK(r.status != 0);
  CHECK(read_text(out / "err.txt").find("no camera") != std::string::npos);

  r = run_cli("render --scene " + (out / "missing.json").string() + " --manifest " +
                  (d / "manifest.json").string(), "", (out / "err2.txt").string());
  CHECK(r.status != 0);
  CHECK(read_text(out / "err2.txt").find("missing reference") != std::string::npos);

  CHECK(run_cli("frobnicate").status != 0);
  CHECK(run_cli("render --bogus-flag").status != 0);
}

TEST_CASE("gradcheck on the bundled toy scene") {
  const fs::path d = data_dir() / "toy";
  const RunResult r = run_cli("gradcheck --scene " + (d / "scene.json").string() + " --manifest " +
                              (d / "manifest.json").string());
  CHECK(r.status == 0);
  const json j = parse_stdout(r);
  REQUIRE(j.is_object());
  CHECK(j["pass"] == true);
  CHECK(j["classes"].size() == kAllParamClasses.size());
  for (const auto& [name, c] : j["classes"].items()) {
    CAPTURE(name);
    CHECK(c["max_rel_error"].get<double>() <= c["threshold"].get<double>());
  }
  CHECK(j["classes"]["position"]["threshold"] == 5e-3);
}

TEST_CASE("pack-atlas") {
  const fs::path out = scratch_dir("pack");
  const fs::path d = data_dir() / "sphere";
  const RunResult r = run_cli("pack-atlas --scene " + (d / "scene.json").string() + " --max-dim 16 --out " + out.string());
  REQUIRE(r.status == 0);
  const json j = parse_stdout(r);
  CHECK(j["pages"] == 2);
  CHECK(j["texture_sets"] == 32);
  CHECK(fs::exists(out / "indirection.json"));
  CHECK(fs::exists(out / "atlas_B_p1_rgb.pfm"));
}

TEST_CASE("bench-atlas at T=16") {
  const RunResult r = run_cli("bench-atlas --texture-res 16");
  REQUIRE(r.status == 0);
  const json j = parse_stdout(r);
  REQUIRE(j.is_object());
  CHECK(j["texture_resolution"] == 16);
  CHECK(j["baseline"]["ratio"] == 1.0);
  for (const char* k : {"baseline", "software", "atlas"}) {
    CHECK(j[k]["median_ms"].get<double>() > 0.0);
    CHECK(j[k]["p95_ms"].get<double>() >= j[k]["median_ms"].get<double>());
  }
  CHECK(j["atlas"]["ratio"].get<double>() >= j["software"]["ratio"].get<double>());
  CHECK(j["atlas_ge_software"] == true);
}

TEST_CASE("fit on the bundled manifest") {
  const fs::path out = scratch_dir("fit_sphere");
  const fs::path d = data_dir() / "sphere";
  const RunResult r = run_cli("fit --scene " + (d / "init.json").string() + " --manifest " +
                              (d / "manifest.json").string() + " --config " +
                              (d / "fit_config.json").string() + " --seed 1 --out " + out.string());
  REQUIRE(r.status == 0);
  const json j = parse_stdout(r);
  CHECK(j["final_psnr"].get<double>() > 30.0);
  CHECK(j["psnr_views"] == "test");
  CHECK(j["stage_invariant"] == true);
  CHECK(fs::exists(out / "checkpoint.json"));
  CHECK(read_text(out / "log.csv").rfind("iteration,stage,total", 0) == 0);
  CHECK_NOTHROW(load_scene(out / "checkpoint.json").validate());
}

TEST_CASE("fit --seed 7 is reproducible") {
  const fs::path d = data_dir() / "sphere";
  const std::string args = "fit --manifest " + (d / "manifest.json").string() +
                           " --splats 48 --iterations 30 --seed 7";
  const fs::path a = scratch_dir("seed7_a"), b = scratch_dir("seed7_b");
  REQUIRE(run_cli(args + " --threads 1 --out " + a.string()).status == 0);
  REQUIRE(run_cli(args + " --threads 8 --out " + b.string()).status == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK(same_bytes(e.path(), b / e.path().filename()));
    ++files;
  }
  CHECK(files >= 5);
}
