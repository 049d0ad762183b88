#include "texsplat/losses.hpp"

#include <array>

namespace texsplat {

double srgb_encode(double x) {
  if (x <= 0.0031308) {
    return 12.92 * x;
  }
  return 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
}

double srgb_encode_derivative(double x) {
  if (x <= 0.0031308) {
    return 12.92;
  }
  return 1.055 / 2.4 * std::pow(x, 1.0 / 2.4 - 1.0);
}

double srgb_decode(double e) {
  if (e <= 0.04045) {
    return e / 12.92;
  }
  return std::pow((e + 0.055) / 1.055, 2.4);
}

Image to_display(const Image& linear) {
  Image out = linear;
  for (double& v : out.data) {
    v = srgb_encode(v);
  }
  return out;
}

Image to_linear(const Image& display) {
  Image out = display;
  for (double& v : out.data) {
    v = srgb_decode(v);
  }
  return out;
}

namespace {

std::array<double, kSsimWindow> gaussian_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = i - kSsimWindow / 2;
    k[i] = std::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) {
    v /= sum;
  }
  return k;
}

// Separable Gaussian filter of a single-channel plane with zero padding.
// Self-adjoint, which the SSIM gradient uses.
std::vector<double> blur(const std::vector<double>& src, int w, int h) {
  static const auto k = gaussian_kernel();
  constexpr int r = kSsimWindow / 2;
  std::vector<double> tmp(src.size(), 0.0);
  std::vector<double> out(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) {
          s += k[i + r] * src[static_cast<std::size_t>(y) * w + xx];
        }
      }
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) {
          s += k[i + r] * tmp[static_cast<std::size_t>(yy) * w + x];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

double ssim_impl(const Image& a, const Image& b, Image* grad) {
  require_same_shape(a, b, "ssim");
  const int w = a.width;
  const int h = a.height;
  const std::size_t n = a.pixel_count();
  if (n == 0) {
    return 1.0;
  }
  double total = 0.0;
  if (grad != nullptr) {
    *grad = Image(w, h, a.channels, 0.0);
  }
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < a.channels; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      x[p] = a.data[p * a.channels + c];
      y[p] = b.data[p * b.channels + c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = blur(x, w, h);
    const auto my = blur(y, w, h);
    const auto exx = blur(xx, w, h);
    const auto eyy = blur(yy, w, h);
    const auto exy = blur(xy, w, h);
    std::vector<double> d_mx(n), d_exx(n), d_exy(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double sxx = exx[p] - mx[p] * mx[p];
      const double syy = eyy[p] - my[p] * my[p];
      const double sxy = exy[p] - mx[p] * my[p];
      const double n1 = 2.0 * mx[p] * my[p] + kC1;
      const double n2 = 2.0 * sxy + kC2;
      const double d1 = mx[p] * mx[p] + my[p] * my[p] + kC1;
      const double d2 = sxx + syy + kC2;
      const double s = (n1 * n2) / (d1 * d2);
      total += s;
      if (grad != nullptr) {
        const double ds_dsxx = -s / d2;
        const double ds_dsxy = 2.0 * n1 / (d1 * d2);
        const double ds_dmx = 2.0 * my[p] * n2 / (d1 * d2) - s * 2.0 * mx[p] / d1;
        d_exx[p] = ds_dsxx;
        d_exy[p] = ds_dsxy;
        d_mx[p] = ds_dmx - 2.0 * mx[p] * ds_dsxx - my[p] * ds_dsxy;
      }
    }
    if (grad != nullptr) {
      const auto g_mx = blur(d_mx, w, h);
      const auto g_exx = blur(d_exx, w, h);
      const auto g_exy = blur(d_exy, w, h);
      const double inv = 1.0 / (static_cast<double>(n) * a.channels);
      for (std::size_t p = 0; p < n; ++p) {
        grad->data[p * a.channels + c] = (g_mx[p] + 2.0 * x[p] * g_exx[p] + y[p] * g_exy[p]) * inv;
      }
    }
  }
  return total / (static_cast<double>(n) * a.channels);
}

} // namespace

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_grad(const Image& a, const Image& b, Image& grad_a) {
  return ssim_impl(a, b, &grad_a);
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = a.data.empty() ? 0.0 : sum / static_cast<double>(a.data.size());
  if (mse <= 0.0) {
    return kPsnrCap;
  }
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

ImageLoss loss_image_display(const Image& render, const Image& target, double lambda) {
  require_same_shape(render, target, "loss_image");
  ImageLoss out;
  const double n = static_cast<double>(render.data.size());
  Image ssim_grad;
  const double s = ssim_with_grad(render, target, ssim_grad);
  out.dssim = (1.0 - s) / 2.0;
  out.grad = Image(render.width, render.height, render.channels, 0.0);
  double l1 = 0.0;
  for (std::size_t i = 0; i < render.data.size(); ++i) {
    const double d = render.data[i] - target.data[i];
    l1 += std::abs(d);
    const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    out.grad.data[i] = (1.0 - lambda) * sign / n - lambda * 0.5 * ssim_grad.data[i];
  }
  out.l1 = n > 0.0 ? l1 / n : 0.0;
  out.value = (1.0 - lambda) * out.l1 + lambda * out.dssim;
  return out;
}

ImageLoss loss_image(const Image& render, const Image& target, double lambda) {
  require_same_shape(render, target, "loss_image");
  ImageLoss out = loss_image_display(to_display(render), to_display(target), lambda);
  for (std::size_t i = 0; i < render.data.size(); ++i) {
    out.grad.data[i] *= srgb_encode_derivative(render.data[i]);
  }
  return out;
}

namespace {

const Mat3& cv_to_eye() {
  static const Mat3 m = Vec3(1.0, -1.0, -1.0).asDiagonal();
  return m;
}

Vec3 plane_ray(const Camera& camera, int x, int y) {
  const Vec2 p = camera.pixel_to_plane(x, y);
  return {p.x(), p.y(), 1.0};
}

struct DepthNormalTerms {
  Vec3 c;
  double sign;
};

DepthNormalTerms depth_normal_terms(const Image& depth, const Camera& camera, int x, int y) {
  const Vec3 p = depth.at(x, y, 0) * plane_ray(camera, x, y);
  const Vec3 px = depth.at(x + 1, y, 0) * plane_ray(camera, x + 1, y);
  const Vec3 py = depth.at(x, y + 1, 0) * plane_ray(camera, x, y + 1);
  const Vec3 c = (px - p).cross(py - p);
  return {c, c.dot(p) > 0.0 ? -1.0 : 1.0};
}

} // namespace

Vec3 world_to_eye_normal(const Camera& camera, const Vec3& n) {
  return cv_to_eye() * (camera.rotation() * n);
}

Vec3 eye_to_world_normal(const Camera& camera, const Vec3& n) {
  return camera.rotation().transpose() * (cv_to_eye() * n);
}

NormalField depth_to_normal(const Image& depth, const Camera& camera) {
  NormalField f;
  f.normals = Image(depth.width, depth.height, 3, 0.0);
  f.mask.assign(depth.pixel_count(), 0);
  for (int y = 0; y + 1 < depth.height; ++y) {
    for (int x = 0; x + 1 < depth.width; ++x) {
      if (!(depth.at(x, y, 0) > 0.0 && depth.at(x + 1, y, 0) > 0.0 && depth.at(x, y + 1, 0) > 0.0)) {
        continue;
      }
      const DepthNormalTerms t = depth_normal_terms(depth, camera, x, y);
      const double len = t.c.norm();
      if (!(len > 0.0)) {
        continue;
      }
      f.normals.set_rgb(x, y, cv_to_eye() * (t.sign * t.c / len));
      f.mask[depth.index(x, y)] = 1;
    }
  }
  return f;
}

Image depth_to_normal_backward(const Image& depth, const Camera& camera, const NormalField& field,
                               const Image& d_normals) {
  Image grad(depth.width, depth.height, 1, 0.0);
  for (int y = 0; y + 1 < depth.height; ++y) {
    for (int x = 0; x + 1 < depth.width; ++x) {
      if (!field.mask[depth.index(x, y)]) {
        continue;
      }
      const Vec3 dn = cv_to_eye() * d_normals.rgb(x, y);
      if (dn.isZero(0.0)) {
        continue;
      }
      const Vec3 r = plane_ray(camera, x, y);
      const Vec3 rx = plane_ray(camera, x + 1, y);
      const Vec3 ry = plane_ray(camera, x, y + 1);
      const Vec3 p = depth.at(x, y, 0) * r;
      const Vec3 e1 = depth.at(x + 1, y, 0) * rx - p;
      const Vec3 e2 = depth.at(x, y + 1, 0) * ry - p;
      const DepthNormalTerms t = depth_normal_terms(depth, camera, x, y);
      const Vec3 dc = t.sign * normalize_backward(t.c, dn);
      const Vec3 de1 = e2.cross(dc);
      const Vec3 de2 = dc.cross(e1);
      grad.at(x + 1, y, 0) += de1.dot(rx);
      grad.at(x, y + 1, 0) += de2.dot(ry);
      grad.at(x, y, 0) -= (de1 + de2).dot(r);
    }
  }
  return grad;
}

NormalLoss loss_normal(const Image& rendered, const Image& depth_normal, const Mask& mask) {
  require_same_shape(rendered, depth_normal, "loss_normal");
  NormalLoss out;
  out.d_rendered = Image(rendered.width, rendered.height, 3, 0.0);
  out.d_depth_normal = Image(rendered.width, rendered.height, 3, 0.0);
  std::size_t count = 0;
  for (char m : mask) {
    count += m ? 1 : 0;
  }
  if (count == 0) {
    return out;
  }
  const double inv = 1.0 / static_cast<double>(count);
  double sum = 0.0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) {
      continue;
    }
    double dot = 0.0;
    for (int c = 0; c < 3; ++c) {
      dot += rendered.data[p * 3 + c] * depth_normal.data[p * 3 + c];
      out.d_rendered.data[p * 3 + c] = -depth_normal.data[p * 3 + c] * inv;
      out.d_depth_normal.data[p * 3 + c] = -rendered.data[p * 3 + c] * inv;
    }
    sum += 1.0 - dot;
  }
  out.value = sum * inv;
  return out;
}

SmoothLoss loss_smooth(const Image& normals, const Image& target, const Mask& mask) {
  require_same_shape(normals, target, "loss_smooth");
  SmoothLoss out;
  out.d_normal = Image(normals.width, normals.height, 3, 0.0);
  const int w = normals.width;
  const int h = normals.height;
  struct Pair {
    std::size_t p, q;
  };
  std::vector<Pair> pairs;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = normals.index(x, y);
      if (!mask[p]) {
        continue;
      }
      if (x + 1 < w && mask[p + 1]) {
        pairs.push_back({p, p + 1});
      }
      if (y + 1 < h && mask[p + w]) {
        pairs.push_back({p, p + static_cast<std::size_t>(w)});
      }
    }
  }
  if (pairs.empty()) {
    return out;
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  double sum = 0.0;
  for (const Pair& pr : pairs) {
    const Vec3 dn = Vec3(&normals.data[pr.q * 3]) - Vec3(&normals.data[pr.p * 3]);
    const Vec3 dc = Vec3(&target.data[pr.q * 3]) - Vec3(&target.data[pr.p * 3]);
    const double weight = std::exp(-dc.norm());
    const double len = dn.norm();
    sum += len * weight;
    if (len > 0.0) {
      const Vec3 g = dn / len * weight * inv;
      for (int c = 0; c < 3; ++c) {
        out.d_normal.data[pr.q * 3 + c] += g[c];
        out.d_normal.data[pr.p * 3 + c] -= g[c];
      }
    }
  }
  out.value = sum * inv;
  return out;
}

double normal_mae_degrees(const Image& a, const Image& b, const Mask& mask) {
  require_same_shape(a, b, "normal_mae");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) {
      continue;
    }
    const Vec3 na = Vec3(&a.data[p * 3]).normalized();
    const Vec3 nb = Vec3(&b.data[p * 3]).normalized();
    sum += std::acos(std::clamp(na.dot(nb), -1.0, 1.0)) * 180.0 / kPi;
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

} // namespace texsplat
