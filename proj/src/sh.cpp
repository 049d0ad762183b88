#include "texsplat/sh.hpp"

namespace texsplat {

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr std::array<double, 5> kC2 = {1.0925484305920792, -1.0925484305920792,
                                       0.31539156525252005, -1.0925484305920792,
                                       0.5462742152960396};
constexpr std::array<double, 7> kC3 = {-0.5900435899266435, 2.890611442640554,
                                       -0.4570457994644658, 0.3731763325901154,
                                       -0.4570457994644658, 1.445305721320277,
                                       -0.5900435899266435};

// Forward-mode dual number carrying d/d(dir).
struct Dual {
  double v = 0.0;
  Vec3 d = Vec3::Zero();
};

Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + b.d * a.v}; }
Dual operator*(double s, const Dual& a) { return {s * a.v, s * a.d}; }

template <typename S>
S constant(double c) {
  if constexpr (std::is_same_v<S, double>) {
    return c;
  } else {
    return S{c, Vec3::Zero()};
  }
}

template <typename S>
void basis_impl(int degree, const S& x, const S& y, const S& z, S* out) {
  out[0] = constant<S>(kC0);
  if (degree < 1) {
    return;
  }
  out[1] = (-kC1) * y;
  out[2] = kC1 * z;
  out[3] = (-kC1) * x;
  if (degree < 2) {
    return;
  }
  const S xx = x * x;
  const S yy = y * y;
  const S zz = z * z;
  const S xy = x * y;
  const S yz = y * z;
  const S xz = x * z;
  out[4] = kC2[0] * xy;
  out[5] = kC2[1] * yz;
  out[6] = kC2[2] * (2.0 * zz - xx - yy);
  out[7] = kC2[3] * xz;
  out[8] = kC2[4] * (xx - yy);
  if (degree < 3) {
    return;
  }
  out[9] = kC3[0] * (y * (3.0 * xx - yy));
  out[10] = kC3[1] * (xy * z);
  out[11] = kC3[2] * (y * (4.0 * zz - xx - yy));
  out[12] = kC3[3] * (z * (2.0 * zz - 3.0 * xx - 3.0 * yy));
  out[13] = kC3[4] * (x * (4.0 * zz - xx - yy));
  out[14] = kC3[5] * (z * (xx - yy));
  out[15] = kC3[6] * (x * (xx - 3.0 * yy));
}

} // namespace

void sh_basis(int degree, const Vec3& dir, double* out) {
  const Vec3 n = dir.normalized();
  basis_impl<double>(degree, n.x(), n.y(), n.z(), out);
}

void sh_basis_with_grad(int degree, const Vec3& dir, double* out, Vec3* grad) {
  const double len = dir.norm();
  const Vec3 n = dir / len;
  // Jacobian of normalize(): (I - n n^T) / |dir|; row k is d n_k / d dir.
  const Mat3 jac = (Mat3::Identity() - n * n.transpose()) / len;
  const Dual x{n.x(), jac.row(0).transpose()};
  const Dual y{n.y(), jac.row(1).transpose()};
  const Dual z{n.z(), jac.row(2).transpose()};
  std::array<Dual, 16> basis;
  basis_impl<Dual>(degree, x, y, z, basis.data());
  for (int i = 0; i < sh_coeff_count(degree); ++i) {
    out[i] = basis[i].v;
    grad[i] = basis[i].d;
  }
}

Vec3 eval_sh_radiance(const IndirectSH& sh, const Vec3& dir) {
  std::array<double, 16> basis{};
  sh_basis(sh.degree, dir, basis.data());
  Vec3 rgb = Vec3::Zero();
  for (int i = 0; i < sh.count(); ++i) {
    for (int c = 0; c < 3; ++c) {
      rgb[c] += sh.coeffs[i * 3 + c] * basis[i];
    }
  }
  return rgb.cwiseMax(0.0);
}

ShBackward eval_sh_radiance_backward(const IndirectSH& sh, const Vec3& dir, const Vec3& upstream,
                                     double* d_coeffs) {
  std::array<double, 16> basis{};
  std::array<Vec3, 16> basis_grad;
  sh_basis_with_grad(sh.degree, dir, basis.data(), basis_grad.data());
  Vec3 raw = Vec3::Zero();
  for (int i = 0; i < sh.count(); ++i) {
    for (int c = 0; c < 3; ++c) {
      raw[c] += sh.coeffs[i * 3 + c] * basis[i];
    }
  }
  ShBackward out;
  for (int c = 0; c < 3; ++c) {
    if (raw[c] <= 0.0) {
      continue;
    }
    for (int i = 0; i < sh.count(); ++i) {
      d_coeffs[i * 3 + c] += upstream[c] * basis[i];
      out.d_dir += upstream[c] * sh.coeffs[i * 3 + c] * basis_grad[i];
    }
  }
  return out;
}

} // namespace texsplat
