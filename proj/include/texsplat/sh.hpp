#pragma once

#include "texsplat/math.hpp"

#include <array>
#include <vector>

namespace texsplat {

inline constexpr int kMaxShDegree = 3;

inline constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Per-splat RGB spherical-harmonics coefficients. Coefficient i of
/// channel c lives at coeffs[i * 3 + c].
struct IndirectSH {
  int degree = kMaxShDegree;
  std::vector<double> coeffs = std::vector<double>(sh_coeff_count(kMaxShDegree) * 3, 0.0);

  IndirectSH() = default;
  explicit IndirectSH(int deg) : degree(deg), coeffs(sh_coeff_count(deg) * 3, 0.0) {}

  int count() const { return sh_coeff_count(degree); }
  bool operator==(const IndirectSH&) const = default;
};

/// Real SH basis (the sign convention of common splatting renderers),
/// evaluated on the normalized direction. Writes sh_coeff_count(degree) values.
void sh_basis(int degree, const Vec3& dir, double* out);

/// Basis values plus d(basis)/d(dir) for an arbitrary (not necessarily unit)
/// direction vector; the normalization is differentiated through.
void sh_basis_with_grad(int degree, const Vec3& dir, double* out, Vec3* grad);

/// max(0, sum_i c_i Y_i(dir)) per channel.
Vec3 eval_sh_radiance(const IndirectSH& sh, const Vec3& dir);

struct ShBackward {
  Vec3 d_dir = Vec3::Zero();
};

/// Pulls `upstream` (dL/d radiance) back to coefficient gradients (accumulated
/// into d_coeffs) and the direction.
ShBackward eval_sh_radiance_backward(const IndirectSH& sh, const Vec3& dir, const Vec3& upstream,
                                     double* d_coeffs);

} // namespace texsplat
