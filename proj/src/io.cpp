#include "texsplat/io.hpp"

#include "texsplat/losses.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace texsplat {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using json = nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  if (!fs::exists(path)) {
    throw MissingReferenceError(path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return in;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const fs::path& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    throw SchemaError(path.string() + " is truncated");
  }
  return v;
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void get_array(std::istream& in, std::vector<T>& v, const fs::path& path) {
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
  if (!in) {
    throw SchemaError(path.string() + " is truncated");
  }
}

void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

void expect_magic(std::istream& in, const char (&magic)[9], const fs::path& path) {
  char buf[8] = {};
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) {
    throw SchemaError("bad magic in " + path.string());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

template <class T>
T field(const json& j, const char* key, const fs::path& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(path.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": field '" + key + "': " + e.what());
  }
}

} // namespace

void write_pfm(const fs::path& path, const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("pfm: only 1 or 3 channels");
  }
  std::ofstream out = open_out(path);
  out << (img.channels == 3 ? "PF" : "Pf") << '\n' << img.width << ' ' << img.height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = img.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(img.data.data() + y * row),
              static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

FloatImage read_pfm(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string tag;
  FloatImage img;
  double scale = 0.0;
  in >> tag >> img.width >> img.height >> scale;
  if (!in || (tag != "PF" && tag != "Pf") || img.width <= 0 || img.height <= 0 || scale == 0.0) {
    throw SchemaError("bad PFM header in " + path.string());
  }
  in.get();
  img.channels = tag == "PF" ? 3 : 1;
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  img.data.resize(row * img.height);
  for (int y = img.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(img.data.data() + y * row),
            static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!in) {
    throw SchemaError(path.string() + " is truncated");
  }
  if (scale > 0.0) {
    for (float& f : img.data) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  return img;
}

void write_pfm(const fs::path& path, const Image& img) {
  FloatImage f{img.width, img.height, img.channels, {}};
  f.data.assign(img.data.begin(), img.data.end());
  write_pfm(path, f);
}

Image read_pfm_image(const fs::path& path) {
  const FloatImage f = read_pfm(path);
  Image img(f.width, f.height, f.channels);
  img.data.assign(f.data.begin(), f.data.end());
  return img;
}

void write_png(const fs::path& path, const Image& display) {
  if (display.channels != 3 && display.channels != 1) {
    throw std::invalid_argument("png: only 1 or 3 channels");
  }
  std::vector<png_byte> bytes(display.pixel_count() * 3);
  for (std::size_t p = 0; p < display.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const double v = display.data[p * display.channels + (display.channels == 3 ? c : 0)];
      bytes[p * 3 + c] = static_cast<png_byte>(std::lround(clamp01(v) * 255.0));
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(display.width);
  image.height = static_cast<png_uint_32>(display.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

Image read_png(const fs::path& path) {
  if (!fs::exists(path)) {
    throw MissingReferenceError(path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw SchemaError("cannot decode " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    throw SchemaError("cannot decode " + path.string() + ": " + image.message);
  }
  Image img(static_cast<int>(image.width), static_cast<int>(image.height), 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = bytes[i] / 255.0;
  }
  return img;
}

std::vector<Triangle> read_obj(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<Vec3> vertices;
  std::vector<Triangle> tris;
  std::string line;
  int line_no = 0;
  auto vertex = [&](const std::string& tok) {
    const std::string digits = tok.substr(0, tok.find('/'));
    long idx = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (ec != std::errc() || end != digits.data() + digits.size()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad face index");
    }
    const long n = static_cast<long>(vertices.size());
    const long k = idx > 0 ? idx - 1 : n + idx;
    if (k < 0 || k >= n) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": vertex index out of range");
    }
    return vertices[static_cast<std::size_t>(k)];
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "v") {
      Vec3 v;
      ls >> v.x() >> v.y() >> v.z();
      if (!ls) {
        throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad vertex");
      }
      vertices.push_back(v);
    } else if (kind == "f") {
      std::vector<std::string> toks;
      std::string tok;
      while (ls >> tok) toks.push_back(tok);
      if (toks.size() != 3) {
        throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": faces must be triangles");
      }
      tris.push_back({vertex(toks[0]), vertex(toks[1]), vertex(toks[2])});
    }
  }
  return tris;
}

void write_obj(const fs::path& path, const std::vector<Triangle>& triangles) {
  std::ofstream out = open_out(path);
  char buf[128];
  for (const Triangle& t : triangles) {
    for (const Vec3* v : {&t.v0, &t.v1, &t.v2}) {
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v->x(), v->y(), v->z());
      out << buf;
    }
  }
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    out << "f " << 3 * i + 1 << ' ' << 3 * i + 2 << ' ' << 3 * i + 3 << '\n';
  }
}

LatLongMap to_latlong(const FloatImage& img) {
  if (img.channels != 3) {
    throw SchemaError("environment maps need 3 channels");
  }
  LatLongMap map(img.width, img.height);
  map.texels = img.data;
  return map;
}

FloatImage from_latlong(const LatLongMap& map) { return {map.width, map.height, 3, map.texels}; }

namespace {

constexpr char kSplatMagic[9] = "TSSPLAT1";
constexpr char kTextureMagic[9] = "TSTEX001";
constexpr const char* kSceneMagic = "texsplat-scene";

fs::path sidecar(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + "." + suffix);
}

void write_splats(const fs::path& path, const std::vector<Splat>& splats) {
  std::ofstream out = open_out(path);
  put_magic(out, kSplatMagic);
  put<std::uint64_t>(out, splats.size());
  for (const Splat& s : splats) {
    for (const Vec3* v : {&s.position, &s.tangent_u, &s.tangent_v}) {
      for (int c = 0; c < 3; ++c) put<double>(out, (*v)[c]);
    }
    put<double>(out, s.scale_u);
    put<double>(out, s.scale_v);
    put<double>(out, s.opacity);
    put<std::int32_t>(out, s.texture_id);
    put<std::int32_t>(out, s.indirect_sh.degree);
    put_array(out, s.indirect_sh.coeffs);
  }
}

std::vector<Splat> read_splats(const fs::path& path, std::size_t expected) {
  std::ifstream in = open_in(path);
  expect_magic(in, kSplatMagic, path);
  const auto count = get<std::uint64_t>(in, path);
  if (count != expected) {
    throw SchemaError(path.string() + " holds " + std::to_string(count) + " splats, header says " +
                      std::to_string(expected));
  }
  std::vector<Splat> splats(count);
  for (Splat& s : splats) {
    for (Vec3* v : {&s.position, &s.tangent_u, &s.tangent_v}) {
      for (int c = 0; c < 3; ++c) (*v)[c] = get<double>(in, path);
    }
    s.scale_u = get<double>(in, path);
    s.scale_v = get<double>(in, path);
    s.opacity = get<double>(in, path);
    s.texture_id = get<std::int32_t>(in, path);
    const int degree = get<std::int32_t>(in, path);
    if (degree < 0 || degree > kMaxShDegree) {
      throw SchemaError(path.string() + ": SH degree out of range");
    }
    s.indirect_sh = IndirectSH(degree);
    get_array(in, s.indirect_sh.coeffs, path);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw SchemaError(path.string() + " has trailing data");
  }
  return splats;
}

void write_textures(const fs::path& path, const std::vector<MaterialTextureSet>& sets, int res) {
  std::ofstream out = open_out(path);
  put_magic(out, kTextureMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(res));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ChannelLayout{}.total()));
  put<std::uint64_t>(out, sets.size());
  for (const MaterialTextureSet& s : sets) {
    for (const TextureMap* m : {&s.albedo, &s.roughness, &s.metallic, &s.tangent_normal}) {
      put_array(out, m->texels);
    }
  }
}

std::vector<MaterialTextureSet> read_textures(const fs::path& path, std::size_t expected,
                                              int expected_res) {
  std::ifstream in = open_in(path);
  expect_magic(in, kTextureMagic, path);
  const auto res = static_cast<int>(get<std::uint32_t>(in, path));
  const auto channels = static_cast<int>(get<std::uint32_t>(in, path));
  const auto count = get<std::uint64_t>(in, path);
  const ChannelLayout layout;
  if (res != expected_res || channels != layout.total() || count != expected) {
    throw SchemaError(path.string() + ": resolution, channel or set count disagrees with the header");
  }
  std::vector<MaterialTextureSet> sets(count);
  for (MaterialTextureSet& s : sets) {
    s.albedo = TextureMap(res, layout.albedo, TextureSemantic::Albedo);
    s.roughness = TextureMap(res, layout.roughness, TextureSemantic::Roughness);
    s.metallic = TextureMap(res, layout.metallic, TextureSemantic::Metallic);
    s.tangent_normal = TextureMap(res, layout.tangent_normal, TextureSemantic::TangentNormalXY);
    for (TextureMap* m : {&s.albedo, &s.roughness, &s.metallic, &s.tangent_normal}) {
      get_array(in, m->texels, path);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw SchemaError(path.string() + " has trailing data");
  }
  return sets;
}

fs::path resolve_ref(const fs::path& base, const std::string& name) {
  const fs::path p = base / name;
  if (!fs::exists(p)) {
    throw MissingReferenceError(p.string());
  }
  return p;
}

} // namespace

void save_scene(const fs::path& path, const Scene& scene) {
  scene.validate();
  const std::string stem = path.stem().string();
  json j;
  j["magic"] = kSceneMagic;
  j["version"] = kSceneVersion;
  j["splats"] = {{"file", stem + ".splats.bin"}, {"count", scene.splats.size()}};
  j["textures"] = {{"file", stem + ".textures.bin"},
                   {"count", scene.textures.size()},
                   {"resolution", scene.texture_resolution()},
                   {"support", scene.texture_config.support}};
  json spec = json::array();
  for (int l = 0; l < scene.environment.levels(); ++l) {
    spec.push_back(stem + ".env_spec_L" + std::to_string(l) + ".pfm");
  }
  j["environment"] = {{"specular", spec},
                      {"diffuse", stem + ".env_diffuse.pfm"},
                      {"learnable", scene.environment.learnable}};
  const bool has_mesh = scene.mesh && !scene.mesh->empty();
  j["mesh"] = has_mesh ? json(stem + ".mesh.obj") : json(nullptr);
  j["background"] = {scene.background.x(), scene.background.y(), scene.background.z()};

  if (!path.parent_path().empty()) {
    fs::create_directories(path.parent_path());
  }
  write_splats(sidecar(path, "splats.bin"), scene.splats);
  write_textures(sidecar(path, "textures.bin"), scene.textures, scene.texture_resolution());
  for (int l = 0; l < scene.environment.levels(); ++l) {
    write_pfm(sidecar(path, "env_spec_L" + std::to_string(l) + ".pfm"),
              from_latlong(scene.environment.specular[l]));
  }
  write_pfm(sidecar(path, "env_diffuse.pfm"), from_latlong(scene.environment.diffuse));
  if (has_mesh) {
    write_obj(sidecar(path, "mesh.obj"), scene.mesh->triangles());
  }
  write_json(path, j);
}

Scene load_scene(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("magic") || j["magic"] != kSceneMagic) {
    throw SchemaError(path.string() + " is not a scene file (bad magic)");
  }
  const int version = field<int>(j, "version", path);
  if (version != kSceneVersion) {
    throw VersionError(path.string() + " has version " + std::to_string(version) + ", expected " +
                       std::to_string(kSceneVersion));
  }
  const fs::path base = path.parent_path();
  Scene scene;
  const json& js = j.contains("splats") ? j["splats"] : json();
  const json& jt = j.contains("textures") ? j["textures"] : json();
  const json& je = j.contains("environment") ? j["environment"] : json();
  const auto splat_count = field<std::size_t>(js, "count", path);
  const auto texture_count = field<std::size_t>(jt, "count", path);
  const int res = field<int>(jt, "resolution", path);
  scene.texture_config.resolution = res;
  scene.texture_config.support = field<double>(jt, "support", path);
  if (!scene.texture_config.valid()) {
    throw SchemaError(path.string() + ": invalid texture configuration");
  }
  const auto bg = field<std::vector<double>>(j, "background", path);
  if (bg.size() != 3) {
    throw SchemaError(path.string() + ": background needs three components");
  }
  scene.background = Vec3(bg[0], bg[1], bg[2]);

  scene.splats = read_splats(resolve_ref(base, field<std::string>(js, "file", path)), splat_count);
  scene.textures =
      read_textures(resolve_ref(base, field<std::string>(jt, "file", path)), texture_count, res);
  scene.environment.specular.clear();
  for (const std::string& name : field<std::vector<std::string>>(je, "specular", path)) {
    scene.environment.specular.push_back(to_latlong(read_pfm(resolve_ref(base, name))));
  }
  scene.environment.diffuse =
      to_latlong(read_pfm(resolve_ref(base, field<std::string>(je, "diffuse", path))));
  scene.environment.learnable = field<bool>(je, "learnable", path);
  if (j.contains("mesh") && !j["mesh"].is_null()) {
    scene.mesh = std::make_shared<VisibilityMesh>(
        read_obj(resolve_ref(base, field<std::string>(j, "mesh", path))));
  }
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return scene;
}

Mat4 camera_to_world_gl(const Camera& camera) {
  const Mat3 r_cv = camera.rotation().transpose();
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r_cv * Vec3(1.0, -1.0, -1.0).asDiagonal();
  m.topRightCorner<3, 1>() = camera.center();
  return m;
}

Camera camera_from_gl(const Mat4& c2w, int width, int height, double fx, double fy, double cx,
                      double cy, double near_plane, double far_plane) {
  const Mat3 r_gl = c2w.topLeftCorner<3, 3>();
  if (!(r_gl.transpose() * r_gl).isApprox(Mat3::Identity(), 1e-6) || r_gl.determinant() <= 0.0 ||
      !c2w.row(3).isApprox(Eigen::RowVector4d(0, 0, 0, 1))) {
    throw SchemaError("camera pose is not a rigid transform");
  }
  const Mat3 r_cv = r_gl * Vec3(1.0, -1.0, -1.0).asDiagonal();
  Camera cam;
  cam.world_to_view.setIdentity();
  cam.world_to_view.topLeftCorner<3, 3>() = r_cv.transpose();
  cam.world_to_view.topRightCorner<3, 1>() = -(r_cv.transpose() * c2w.topRightCorner<3, 1>());
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.near_plane = near_plane;
  cam.far_plane = far_plane;
  return cam;
}

Manifest load_manifest(const fs::path& path) {
  const json j = read_json(path);
  Manifest m;
  m.width = field<int>(j, "w", path);
  m.height = field<int>(j, "h", path);
  const double fx = field<double>(j, "fl_x", path);
  const double fy = j.contains("fl_y") ? field<double>(j, "fl_y", path) : fx;
  const double cx = j.contains("cx") ? field<double>(j, "cx", path) : m.width / 2.0;
  const double cy = j.contains("cy") ? field<double>(j, "cy", path) : m.height / 2.0;
  const double near_plane = j.contains("near") ? field<double>(j, "near", path) : 0.01;
  const double far_plane = j.contains("far") ? field<double>(j, "far", path) : 1000.0;
  if (m.width <= 0 || m.height <= 0 || !(fx > 0.0) || !(fy > 0.0)) {
    throw SchemaError(path.string() + ": invalid intrinsics");
  }
  const json frames = field<json>(j, "frames", path);
  if (!frames.is_array()) {
    throw SchemaError(path.string() + ": frames must be an array");
  }
  for (const json& f : frames) {
    ManifestFrame frame;
    frame.file_path = field<std::string>(f, "file_path", path);
    const auto rows = field<std::vector<std::vector<double>>>(f, "transform_matrix", path);
    if (rows.size() != 4) {
      throw SchemaError(path.string() + ": transform_matrix must be 4x4");
    }
    Mat4 c2w;
    for (int r = 0; r < 4; ++r) {
      if (rows[r].size() != 4) {
        throw SchemaError(path.string() + ": transform_matrix must be 4x4");
      }
      for (int c = 0; c < 4; ++c) c2w(r, c) = rows[r][c];
    }
    frame.camera = camera_from_gl(c2w, m.width, m.height, fx, fy, cx, cy, near_plane, far_plane);
    const std::string split = f.contains("split") ? field<std::string>(f, "split", path) : "train";
    if (split != "train" && split != "test") {
      throw SchemaError(path.string() + ": split must be train or test");
    }
    frame.test = split == "test";
    m.frames.push_back(std::move(frame));
  }
  return m;
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  if (manifest.frames.empty()) {
    throw std::invalid_argument("manifest has no frames");
  }
  const Camera& c0 = manifest.frames.front().camera;
  json j;
  j["w"] = manifest.width;
  j["h"] = manifest.height;
  j["fl_x"] = c0.fx;
  j["fl_y"] = c0.fy;
  j["cx"] = c0.cx;
  j["cy"] = c0.cy;
  j["near"] = c0.near_plane;
  j["far"] = c0.far_plane;
  json frames = json::array();
  for (const ManifestFrame& f : manifest.frames) {
    const Mat4 m = camera_to_world_gl(f.camera);
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
      rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    }
    frames.push_back({{"file_path", f.file_path},
                      {"transform_matrix", rows},
                      {"split", f.test ? "test" : "train"}});
  }
  j["frames"] = frames;
  write_json(path, j);
}

Dataset load_dataset(const fs::path& path) {
  const Manifest m = load_manifest(path);
  Dataset data;
  for (const ManifestFrame& f : m.frames) {
    const fs::path img_path = resolve_ref(path.parent_path(), f.file_path);
    Image img;
    if (img_path.extension() == ".pfm") {
      img = read_pfm_image(img_path);
    } else if (img_path.extension() == ".png") {
      img = to_linear(read_png(img_path));
    } else {
      throw SchemaError(img_path.string() + ": unsupported image type");
    }
    if (img.width != m.width || img.height != m.height || img.channels != 3) {
      throw SchemaError(img_path.string() + ": image shape disagrees with the manifest");
    }
    (f.test ? data.test : data.train).push_back(View{f.camera, std::move(img)});
  }
  return data;
}

void write_atlas(const fs::path& dir, const AtlasSet& atlases) {
  fs::create_directories(dir);
  for (AtlasFamily fam : {AtlasFamily::AlbedoRoughness, AtlasFamily::NormalMetallic}) {
    const char* tag = fam == AtlasFamily::AlbedoRoughness ? "A" : "B";
    const auto& pages = atlases.pages(fam);
    for (std::size_t p = 0; p < pages.size(); ++p) {
      const TextureAtlas& page = pages[p];
      const std::size_t n = static_cast<std::size_t>(page.width()) * page.height();
      FloatImage rgb{page.width(), page.height(), 3, std::vector<float>(n * 3)};
      FloatImage alpha{page.width(), page.height(), 1, std::vector<float>(n)};
      for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) rgb.data[i * 3 + c] = page.texels[i * 4 + c];
        alpha.data[i] = page.texels[i * 4 + 3];
      }
      const std::string base = std::string("atlas_") + tag + "_p" + std::to_string(p);
      write_pfm(dir / (base + "_rgb.pfm"), rgb);
      if (fam == AtlasFamily::AlbedoRoughness) {
        write_pfm(dir / (base + "_a.pfm"), alpha);
      }
    }
  }
  json ind = json::object();
  for (std::size_t id = 0; id < atlases.indirection.size(); ++id) {
    const IndirectionEntry& e = atlases.indirection.entries[id];
    ind[std::to_string(id)] = {e.page, e.chart_x, e.chart_y};
  }
  write_json(dir / "indirection.json", ind);
  json layout = {{"chart_size", atlases.chart_size},
                 {"charts_x", atlases.capacity_x},
                 {"charts_y", atlases.capacity_y},
                 {"pages", atlases.page_count()},
                 {"A", channel_assignment(AtlasFamily::AlbedoRoughness)},
                 {"B", channel_assignment(AtlasFamily::NormalMetallic)}};
  write_json(dir / "layout.json", layout);
  if (!atlases.albedo_roughness.empty()) {
    const TextureAtlas& page = atlases.albedo_roughness.front();
    Image preview(page.width(), page.height(), 3);
    for (std::size_t i = 0; i < preview.pixel_count(); ++i) {
      for (int c = 0; c < 3; ++c) preview.data[i * 3 + c] = page.texels[i * 4 + c];
    }
    write_png(dir / "atlas_A_p0_preview.png", preview);
  }
}

void load_train_config(const fs::path& path, TrainConfig& cfg, LossWeights& weights,
                       FitInit* init) {
  const json j = read_json(path);
  if (!j.is_object()) {
    throw SchemaError(path.string() + ": config must be a JSON object");
  }
  auto classes = [&](const json& v) {
    std::vector<ParamClass> out;
    for (const auto& s : v.get<std::vector<std::string>>()) {
      try {
        out.push_back(param_class_from_string(s));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(path.string() + ": " + e.what());
      }
    }
    return out;
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "iterations") cfg.total_iterations = v.get<int>();
      else if (key == "stage_boundary") cfg.stage_boundary = v.get<int>();
      else if (key == "texture_resolution") cfg.texture_resolution = v.get<int>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "ssim_window") cfg.ssim_window = v.get<int>();
      else if (key == "lr_final_factor") cfg.lr_final_factor = v.get<double>();
      else if (key == "prune_interval") cfg.prune_interval = v.get<int>();
      else if (key == "prune_threshold") cfg.prune_threshold = v.get<double>();
      else if (key == "eval_interval") cfg.eval_interval = v.get<int>();
      else if (key == "use_visibility") cfg.render.use_visibility = v.get<bool>();
      else if (key == "optimize") cfg.optimize = classes(v);
      else if (key == "frozen") cfg.frozen = classes(v);
      else if (key == "lambda") weights.lambda = v.get<double>();
      else if (key == "lambda_normal") weights.normal = v.get<double>();
      else if (key == "lambda_smooth") weights.smooth = v.get<double>();
      else if (init != nullptr && key == "init_splats") init->splats = v.get<int>();
      else if (init != nullptr && key == "init_radius") init->radius = v.get<double>();
      else if (init != nullptr && key == "init_sh_degree") init->sh_degree = v.get<int>();
      else if (key == "lr") {
        for (const auto& [name, rate] : v.items()) {
          const double r = rate.get<double>();
          if (name == "position") cfg.lr.position = r;
          else if (name == "frame") cfg.lr.frame = r;
          else if (name == "scale") cfg.lr.scale = r;
          else if (name == "opacity") cfg.lr.opacity = r;
          else if (name == "texels") cfg.lr.texels = r;
          else if (name == "sh") cfg.lr.sh = r;
          else if (name == "environment") cfg.lr.environment = r;
          else throw SchemaError(path.string() + ": unknown learning rate '" + name + "'");
        }
      } else {
        throw SchemaError(path.string() + ": unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ": key '" + key + "': " + e.what());
    }
  }
}

} // namespace texsplat
