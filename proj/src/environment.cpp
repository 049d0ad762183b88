#include "texsplat/environment.hpp"

#include "texsplat/brdf.hpp"
#include "texsplat/parallel.hpp"

#include <stdexcept>

namespace texsplat {

Vec3 LatLongMap::texel_direction(int i, int j) const {
  const double phi = (i + 0.5) / width * 2.0 * kPi - kPi;
  const double theta = (j + 0.5) / height * kPi;
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

double LatLongMap::texel_solid_angle(int j) const {
  const double theta = (j + 0.5) / height * kPi;
  return std::sin(theta) * (kPi / height) * (2.0 * kPi / width);
}

namespace {

struct MapCoords {
  double x = 0.0;
  double y = 0.0;
  Eigen::RowVector3d dx_ddir = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d dy_ddir = Eigen::RowVector3d::Zero();
};

MapCoords direction_to_map(const LatLongMap& map, const Vec3& dir, bool want_grad) {
  const double rho2 = dir.x() * dir.x() + dir.y() * dir.y();
  const double rho = std::sqrt(rho2);
  const double phi = std::atan2(dir.y(), dir.x());
  const double theta = std::atan2(rho, dir.z());
  MapCoords mc;
  mc.x = (phi + kPi) / (2.0 * kPi) * map.width - 0.5;
  mc.y = theta / kPi * map.height - 0.5;
  if (want_grad && rho > 1e-12) {
    const double len2 = rho2 + dir.z() * dir.z();
    const double sx = map.width / (2.0 * kPi);
    const double sy = map.height / kPi;
    mc.dx_ddir = sx * Eigen::RowVector3d(-dir.y() / rho2, dir.x() / rho2, 0.0);
    mc.dy_ddir = sy * Eigen::RowVector3d(dir.z() * dir.x() / (rho * len2),
                                         dir.z() * dir.y() / (rho * len2), -rho / len2);
  }
  return mc;
}

struct MapFootprint {
  int i0, i1, j0, j1;
  double fx, fy;
};

MapFootprint map_footprint(const LatLongMap& map, double x, double y) {
  const double x0 = fast_floor(x);
  const double y0 = fast_floor(y);
  MapFootprint fp;
  fp.fx = x - x0;
  fp.fy = y - y0;
  const int w = map.width;
  const int ix = static_cast<int>(x0);
  fp.i0 = ((ix % w) + w) % w;
  fp.i1 = (fp.i0 + 1) % w;
  const int iy = static_cast<int>(y0);
  fp.j0 = std::clamp(iy, 0, map.height - 1);
  fp.j1 = std::clamp(iy + 1, 0, map.height - 1);
  return fp;
}

} // namespace

Vec3 LatLongMap::sample(const Vec3& dir) const {
  const MapCoords mc = direction_to_map(*this, dir, false);
  const MapFootprint fp = map_footprint(*this, mc.x, mc.y);
  const Vec3 t00 = texel(fp.i0, fp.j0);
  const Vec3 t10 = texel(fp.i1, fp.j0);
  const Vec3 t01 = texel(fp.i0, fp.j1);
  const Vec3 t11 = texel(fp.i1, fp.j1);
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    out[c] = lerp(lerp(t00[c], t10[c], fp.fx), lerp(t01[c], t11[c], fp.fx), fp.fy);
  }
  return out;
}

LatLongSample sample_with_grad(const LatLongMap& map, const Vec3& dir) {
  const MapCoords mc = direction_to_map(map, dir, true);
  const MapFootprint fp = map_footprint(map, mc.x, mc.y);
  const Vec3 t00 = map.texel(fp.i0, fp.j0);
  const Vec3 t10 = map.texel(fp.i1, fp.j0);
  const Vec3 t01 = map.texel(fp.i0, fp.j1);
  const Vec3 t11 = map.texel(fp.i1, fp.j1);
  LatLongSample s;
  for (int c = 0; c < 3; ++c) {
    s.value[c] = lerp(lerp(t00[c], t10[c], fp.fx), lerp(t01[c], t11[c], fp.fx), fp.fy);
    const double dfx = (1.0 - fp.fy) * (t10[c] - t00[c]) + fp.fy * (t11[c] - t01[c]);
    const double dfy = (1.0 - fp.fx) * (t01[c] - t00[c]) + fp.fx * (t11[c] - t10[c]);
    s.d_dir.row(c) = dfx * mc.dx_ddir + dfy * mc.dy_ddir;
  }
  const int w = map.width;
  s.taps.index = {fp.j0 * w + fp.i0, fp.j0 * w + fp.i1, fp.j1 * w + fp.i0, fp.j1 * w + fp.i1};
  s.taps.weight = {(1.0 - fp.fx) * (1.0 - fp.fy), fp.fx * (1.0 - fp.fy), (1.0 - fp.fx) * fp.fy,
                   fp.fx * fp.fy};
  return s;
}

std::pair<int, int> mip_resolution(int base_width, int base_height, int level) {
  return {std::max(4, base_width >> level), std::max(2, base_height >> level)};
}

namespace {

// Solid-angle weighted box filter by integer factors; returns the source
// unchanged when the sizes do not divide.
LatLongMap downsample(const LatLongMap& src, int width, int height) {
  if (width >= src.width || height >= src.height || src.width % width != 0 ||
      src.height % height != 0) {
    return src;
  }
  const int fx = src.width / width;
  const int fy = src.height / height;
  LatLongMap out(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      Vec3 sum = Vec3::Zero();
      double wsum = 0.0;
      for (int sj = j * fy; sj < (j + 1) * fy; ++sj) {
        const double w = src.texel_solid_angle(sj);
        for (int si = i * fx; si < (i + 1) * fx; ++si) {
          sum += w * src.texel(si, sj);
          wsum += w;
        }
      }
      out.set_texel(i, j, sum / wsum);
    }
  }
  return out;
}

struct SourceTexels {
  std::vector<Vec3> dir;
  std::vector<Vec3> radiance;
  std::vector<double> solid_angle;
};

SourceTexels gather(const LatLongMap& map) {
  SourceTexels s;
  s.dir.reserve(map.texel_count());
  s.radiance.reserve(map.texel_count());
  s.solid_angle.reserve(map.texel_count());
  for (int j = 0; j < map.height; ++j) {
    const double dw = map.texel_solid_angle(j);
    for (int i = 0; i < map.width; ++i) {
      s.dir.push_back(map.texel_direction(i, j));
      s.radiance.push_back(map.texel(i, j));
      s.solid_angle.push_back(dw);
    }
  }
  return s;
}

LatLongMap prefilter_level(const SourceTexels& src, int width, int height, double roughness) {
  LatLongMap out(width, height);
  const double alpha = roughness * roughness;
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < width; ++i) {
      const Vec3 r = out.texel_direction(i, j);
      Vec3 sum = Vec3::Zero();
      double wsum = 0.0;
      for (std::size_t k = 0; k < src.dir.size(); ++k) {
        const double nl = r.dot(src.dir[k]);
        if (nl <= 0.0) {
          continue;
        }
        const double nh = std::sqrt(0.5 * (1.0 + nl));
        const double w = ggx_distribution(nh, alpha) * nl * src.solid_angle[k];
        sum += w * src.radiance[k];
        wsum += w;
      }
      out.set_texel(i, j, wsum > 0.0 ? Vec3(sum / wsum) : Vec3::Zero());
    }
  });
  return out;
}

} // namespace

std::vector<LatLongMap> prefilter_specular(const LatLongMap& base, int levels) {
  if (levels < 1) {
    throw std::invalid_argument("prefilter_specular: need at least one level");
  }
  std::vector<LatLongMap> pyramid;
  pyramid.push_back(base);
  for (int level = 1; level < levels; ++level) {
    const auto [w, h] = mip_resolution(base.width, base.height, level);
    const auto [sw, sh] = mip_resolution(base.width, base.height, level - 1);
    const SourceTexels src = gather(downsample(base, sw, sh));
    const double roughness = static_cast<double>(level) / (levels - 1);
    pyramid.push_back(prefilter_level(src, w, h, roughness));
  }
  return pyramid;
}

LatLongMap diffuse_irradiance(const LatLongMap& base, int width, int height) {
  const SourceTexels src = gather(downsample(base, std::min(base.width, 128), std::min(base.height, 64)));
  LatLongMap out(width, height);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < width; ++i) {
      const Vec3 n = out.texel_direction(i, j);
      Vec3 sum = Vec3::Zero();
      for (std::size_t k = 0; k < src.dir.size(); ++k) {
        const double c = n.dot(src.dir[k]);
        if (c > 0.0) {
          sum += (c * src.solid_angle[k]) * src.radiance[k];
        }
      }
      out.set_texel(i, j, sum);
    }
  });
  return out;
}

Vec3 EnvironmentLight::sample_specular(const Vec3& dir, double roughness) const {
  const int n = levels();
  const double level = clamp01(roughness) * (n - 1);
  const int l0 = std::min(static_cast<int>(std::floor(level)), n - 1);
  const int l1 = std::min(l0 + 1, n - 1);
  const double f = level - l0;
  const Vec3 a = specular[l0].sample(dir);
  if (l1 == l0) {
    return a;
  }
  const Vec3 b = specular[l1].sample(dir);
  return {lerp(a[0], b[0], f), lerp(a[1], b[1], f), lerp(a[2], b[2], f)};
}

SpecularSample EnvironmentLight::sample_specular_with_grad(const Vec3& dir, double roughness) const {
  const int n = levels();
  const double level = clamp01(roughness) * (n - 1);
  SpecularSample s;
  s.level0 = std::min(static_cast<int>(std::floor(level)), n - 1);
  s.level1 = std::min(s.level0 + 1, n - 1);
  s.level_frac = level - s.level0;
  const LatLongSample a = sample_with_grad(specular[s.level0], dir);
  s.taps0 = a.taps;
  if (s.level1 == s.level0) {
    s.value = a.value;
    s.d_dir = a.d_dir;
    s.level_frac = 0.0;
    return s;
  }
  const LatLongSample b = sample_with_grad(specular[s.level1], dir);
  s.taps1 = b.taps;
  const double f = s.level_frac;
  for (int c = 0; c < 3; ++c) {
    s.value[c] = lerp(a.value[c], b.value[c], f);
  }
  s.d_dir = (1.0 - f) * a.d_dir + f * b.d_dir;
  if (roughness > 0.0 && roughness < 1.0) {
    s.d_roughness = (b.value - a.value) * (n - 1);
  }
  return s;
}

EnvironmentLight EnvironmentLight::from_base(const LatLongMap& base, int levels, int diffuse_width,
                                             int diffuse_height) {
  EnvironmentLight env;
  env.specular = prefilter_specular(base, levels);
  env.diffuse = diffuse_irradiance(base, diffuse_width, diffuse_height);
  return env;
}

EnvironmentLight EnvironmentLight::constant(const Vec3& radiance, int base_width, int base_height,
                                            int levels, int diffuse_width, int diffuse_height) {
  EnvironmentLight env;
  env.specular.clear();
  for (int l = 0; l < levels; ++l) {
    const auto [w, h] = mip_resolution(base_width, base_height, l);
    LatLongMap m(w, h);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        m.set_texel(i, j, radiance);
      }
    }
    env.specular.push_back(std::move(m));
  }
  LatLongMap base(base_width, base_height);
  for (int j = 0; j < base_height; ++j) {
    for (int i = 0; i < base_width; ++i) {
      base.set_texel(i, j, radiance);
    }
  }
  env.diffuse = diffuse_irradiance(base, diffuse_width, diffuse_height);
  return env;
}

} // namespace texsplat
