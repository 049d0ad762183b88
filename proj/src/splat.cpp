#include "texsplat/splat.hpp"

namespace texsplat {

bool satisfies_invariants(const Splat& splat, double tolerance) {
  return std::abs(splat.tangent_u.norm() - 1.0) <= tolerance &&
         std::abs(splat.tangent_v.norm() - 1.0) <= tolerance &&
         std::abs(splat.tangent_u.dot(splat.tangent_v)) <= tolerance && splat.scale_u > 0.0 &&
         splat.scale_v > 0.0 && splat.opacity >= 0.0 && splat.opacity <= 1.0;
}

void orthonormalize_frame(Splat& splat) {
  Vec3 u = splat.tangent_u;
  if (u.norm() < 1e-12) {
    u = Vec3::UnitX();
  }
  u.normalize();
  Vec3 v = splat.tangent_v - u * u.dot(splat.tangent_v);
  if (v.norm() < 1e-12) {
    v = u.unitOrthogonal();
  }
  splat.tangent_u = u;
  splat.tangent_v = v.normalized();
}

bool Camera::valid(double tolerance) const {
  const Mat3 r = rotation();
  const bool orthonormal = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tolerance;
  const Eigen::RowVector4d bottom = world_to_view.row(3);
  return orthonormal && bottom.isApprox(Eigen::RowVector4d(0, 0, 0, 1)) && width >= 1 &&
         height >= 1 && near_plane > 0.0 && near_plane < far_plane && fx > 0.0 && fy > 0.0;
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                       int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Camera cam;
  cam.world_to_view.setIdentity();
  cam.world_to_view.topLeftCorner<3, 3>() = r;
  cam.world_to_view.topRightCorner<3, 1>() = -(r * eye);
  cam.fx = focal;
  cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  return cam;
}

SplatHomography build_homography(const Splat& splat, const Camera& camera) {
  SplatHomography h;
  h.H.col(0).head<3>() = splat.scale_u * splat.tangent_u;
  h.H.col(1).head<3>() = splat.scale_v * splat.tangent_v;
  h.H.col(3).head<3>() = splat.position;
  h.H(3, 3) = 1.0;
  h.WH = camera.world_to_view * h.H;
  return h;
}

IntersectionFrame ray_splat_intersect(const SplatHomography& h, const Camera& camera,
                                      const Vec2& plane) {
  const Vec3 a = h.WH.col(0).head<3>();
  const Vec3 b = h.WH.col(1).head<3>();
  const Vec3 d = h.WH.col(3).head<3>();
  return intersect_columns(a, b, d, plane.x(), plane.y(), camera.near_plane);
}

Vec3 geometric_normal(const Splat& splat) { return splat.tangent_u.cross(splat.tangent_v); }

double effective_opacity(const Splat& splat, const IntersectionFrame& frame) {
  if (!frame.valid) {
    return 0.0;
  }
  const double alpha = splat.opacity * gaussian_weight(frame.u, frame.v);
  return alpha < kAlphaCutoff ? 0.0 : alpha;
}

double cutoff_radius(double opacity) {
  const double ratio = opacity / kAlphaCutoff;
  if (!(ratio > 1.0)) {
    return 0.0;
  }
  return std::sqrt(2.0 * std::log(ratio));
}

} // namespace texsplat
