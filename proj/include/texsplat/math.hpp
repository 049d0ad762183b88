#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace texsplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;

/// a + f * (b - a). Returns `a` bit-exactly when a == b, which the texture
/// samplers rely on for constant-texel equivalence.
inline double lerp(double a, double b, double f) { return a + f * (b - a); }

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

/// std::floor for |x| < 2^62 without a libm call on baseline x86-64.
inline double fast_floor(double x) {
  const double t = static_cast<double>(static_cast<long long>(x));
  return t > x ? t - 1.0 : t;
}

inline Vec3 reflect_dir(const Vec3& outgoing, const Vec3& normal) {
  return 2.0 * normal.dot(outgoing) * normal - outgoing;
}

/// Gradient of normalize(v) = v / |v| pulled back from `upstream`.
inline Vec3 normalize_backward(const Vec3& v, const Vec3& upstream) {
  const double len = v.norm();
  const Vec3 n = v / len;
  return (upstream - n * n.dot(upstream)) / len;
}

} // namespace texsplat
