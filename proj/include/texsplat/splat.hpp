#pragma once

#include "texsplat/math.hpp"
#include "texsplat/sh.hpp"

namespace texsplat {

/// Fragments below this effective opacity do not contribute (8-bit visibility).
inline constexpr double kAlphaCutoff = 1.0 / 255.0;
/// |h_u^1 h_v^2 - h_u^2 h_v^1| at or below this marks an edge-on splat.
inline constexpr double kDenominatorEpsilon = 1e-9;

/// A planar 2D Gaussian primitive.
struct Splat {
  Vec3 position = Vec3::Zero();
  Vec3 tangent_u = Vec3::UnitX();
  Vec3 tangent_v = Vec3::UnitY();
  double scale_u = 1.0;
  double scale_v = 1.0;
  double opacity = 1.0;
  int texture_id = 0;
  IndirectSH indirect_sh;
};

/// Checks unit, orthogonal tangents, positive scales and opacity in [0, 1].
bool satisfies_invariants(const Splat& splat, double tolerance = 1e-6);

/// Gram-Schmidt on (t_u, t_v): keeps t_u's direction, makes t_v orthogonal.
void orthonormalize_frame(Splat& splat);

/// Pinhole camera. View space follows the ray parameterization
/// x_ray = (x z, y z, z, 1): +x right, +y down, +z forward.
struct Camera {
  Mat4 world_to_view = Mat4::Identity();
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  double near_plane = 0.01;
  double far_plane = 1000.0;

  Mat3 rotation() const { return world_to_view.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_view.topRightCorner<3, 1>(); }
  Vec3 center() const { return -(rotation().transpose() * translation()); }

  /// Camera-plane coordinates of the center of pixel (px, py).
  Vec2 pixel_to_plane(int px, int py) const {
    return {(px + 0.5 - cx) / fx, (py + 0.5 - cy) / fy};
  }

  /// Unnormalized world direction of the ray through camera-plane point (x, y).
  Vec3 ray_direction(const Vec2& plane) const {
    return rotation().transpose() * Vec3(plane.x(), plane.y(), 1.0);
  }

  bool valid(double tolerance = 1e-6) const;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                        int width, int height);
};

struct SplatHomography {
  Mat4 H = Mat4::Zero();
  Mat4 WH = Mat4::Zero();
};

struct IntersectionFrame {
  Vec4 h_u = Vec4::Zero();
  Vec4 h_v = Vec4::Zero();
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  bool valid = false;
};

SplatHomography build_homography(const Splat& splat, const Camera& camera);

/// Closed-form intersection from the view-space columns of W*H:
/// a = W s_u t_u, b = W s_v t_v, d = W p (first three rows). `x`, `y` are
/// camera-plane coordinates. The ray planes (-1, 0, 0, x) and (0, -1, 0, y)
/// act on the ray-homogeneous point (X, Y, *, Z), so the fourth row of the
/// transform is view depth. Shared by the reference operation and the
/// rasterizer's inner loop.
inline IntersectionFrame intersect_columns(const Vec3& a, const Vec3& b, const Vec3& d, double x,
                                           double y, double near_plane) {
  IntersectionFrame f;
  f.h_u = Vec4(x * a.z() - a.x(), x * b.z() - b.x(), 0.0, x * d.z() - d.x());
  f.h_v = Vec4(y * a.z() - a.y(), y * b.z() - b.y(), 0.0, y * d.z() - d.y());
  const double den = f.h_u[0] * f.h_v[1] - f.h_u[1] * f.h_v[0];
  if (!(std::abs(den) > kDenominatorEpsilon)) {
    return f;
  }
  f.u = (f.h_u[1] * f.h_v[3] - f.h_u[3] * f.h_v[1]) / den;
  f.v = (f.h_u[3] * f.h_v[0] - f.h_u[0] * f.h_v[3]) / den;
  f.z = a.z() * f.u + b.z() * f.v + d.z();
  f.valid = f.z > near_plane;
  return f;
}

IntersectionFrame ray_splat_intersect(const SplatHomography& h, const Camera& camera,
                                      const Vec2& plane);

inline double gaussian_weight(double u, double v) { return std::exp(-(u * u + v * v) / 2.0); }

Vec3 geometric_normal(const Splat& splat);

/// o_k * G(u, v); 0 when the frame is invalid or the value falls below kAlphaCutoff.
double effective_opacity(const Splat& splat, const IntersectionFrame& frame);

/// Radius in (u, v) beyond which o * G(u, v) < kAlphaCutoff; 0 for splats
/// that never reach the cutoff.
double cutoff_radius(double opacity);

} // namespace texsplat
