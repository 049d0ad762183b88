#pragma once

#include "texsplat/image.hpp"
#include "texsplat/splat.hpp"

#include <vector>

namespace texsplat {

/// sRGB opto-electronic transfer (linear -> display), extended linearly below 0
/// and along the power curve above 1.
double srgb_encode(double linear);
double srgb_encode_derivative(double linear);
double srgb_decode(double encoded);
Image to_display(const Image& linear);
Image to_linear(const Image& display);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over pixels and channels; Gaussian window with zero padding.
double ssim(const Image& a, const Image& b);
/// SSIM and its gradient with respect to `a`.
double ssim_with_grad(const Image& a, const Image& b, Image& grad_a);

/// 10 log10(1 / MSE), capped at 99 dB.
double psnr(const Image& a, const Image& b);
inline constexpr double kPsnrCap = 99.0;

struct ImageLoss {
  double value = 0.0;
  double l1 = 0.0;
  double dssim = 0.0;
  Image grad;
};

/// (1 - lambda) L1 + lambda (1 - SSIM) / 2 on display-space images; the
/// gradient is with respect to `render`.
ImageLoss loss_image_display(const Image& render, const Image& target, double lambda);
/// Same loss with both linear images encoded to display space first; the
/// gradient is with respect to the linear render.
ImageLoss loss_image(const Image& render, const Image& target, double lambda);

/// Pixel mask, row-major.
using Mask = std::vector<char>;

struct NormalField {
  Image normals;  // 3 channels, eye space with +z toward the camera
  Mask mask;
};

/// Backprojects depth (> 0 where defined) into view space and takes the
/// normalized cross product of forward differences, oriented toward the
/// camera. Output uses eye axes x right, y up, z toward the viewer.
/// Pixels lacking a defined right or lower neighbor are masked out.
NormalField depth_to_normal(const Image& depth, const Camera& camera);
/// dL/d depth for upstream dL/d normals on the masked pixels.
Image depth_to_normal_backward(const Image& depth, const Camera& camera, const NormalField& field,
                               const Image& d_normals);

/// World normal -> eye axes used by depth_to_normal.
Vec3 world_to_eye_normal(const Camera& camera, const Vec3& n);
Vec3 eye_to_world_normal(const Camera& camera, const Vec3& n);

struct NormalLoss {
  double value = 0.0;
  Image d_rendered;
  Image d_depth_normal;
};

/// Mean over the mask of (1 - dot(depth_normal, rendered)).
NormalLoss loss_normal(const Image& rendered, const Image& depth_normal, const Mask& mask);

struct SmoothLoss {
  double value = 0.0;
  Image d_normal;
};

/// Mean over valid forward-difference pairs (both pixels in the mask) of
/// |N(q) - N(p)| exp(-|C(q) - C(p)|) along x and y.
SmoothLoss loss_smooth(const Image& normals, const Image& target, const Mask& mask);

/// Mean angular error in degrees over the mask.
double normal_mae_degrees(const Image& a, const Image& b, const Mask& mask);

} // namespace texsplat
