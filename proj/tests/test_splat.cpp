#include "support.hpp"

#include <doctest.h>

using namespace texsplat;
using namespace testing;

namespace {

// Independent oracle: solve p + u s_u t_u + v s_v t_v = C + t d.
Vec2 ray_plane_oracle(const Splat& s, const Camera& cam, const Vec2& plane) {
  Mat3 A;
  A.col(0) = s.scale_u * s.tangent_u;
  A.col(1) = s.scale_v * s.tangent_v;
  A.col(2) = -cam.ray_direction(plane);
  const Vec3 x = A.fullPivLu().solve(cam.center() - s.position);
  return {x[0], x[1]};
}

} // namespace

TEST_CASE("homography columns") {
  Splat s;
  s.scale_u = 2.0;
  s.scale_v = 3.0;
  const Camera cam;
  const SplatHomography h = build_homography(s, cam);
  CHECK(h.H.col(0) == Vec4(2, 0, 0, 0));
  CHECK(h.H.col(1) == Vec4(0, 3, 0, 0));
  CHECK(h.H.col(2) == Vec4(0, 0, 0, 0));
  CHECK(h.H.col(3) == Vec4(0, 0, 0, 1));
  CHECK(h.WH == h.H);

  Splat t;
  t.position = Vec3(1, 2, 3);
  CHECK(build_homography(t, cam).H.col(3) == Vec4(1, 2, 3, 1));
  CHECK(build_homography(t, cam).H.row(3) == Eigen::RowVector4d(0, 0, 0, 1));
}

TEST_CASE("homography composes the view transform") {
  std::mt19937_64 rng(1);
  Splat s;
  random_frame(rng, s.tangent_u, s.tangent_v);
  s.position = Vec3(0.3, -0.2, 0.1);
  const Camera cam = Camera::look_at(Vec3(1, 2, 3), Vec3::Zero(), Vec3::UnitZ(), 10, 8, 8);
  const SplatHomography h = build_homography(s, cam);
  CHECK((h.WH - cam.world_to_view * h.H).norm() < 1e-15);
}

TEST_CASE("intersection at the principal point") {
  const Splat s = facing_splat(Vec3::Zero(), 1.0, 1.0);
  Camera cam = axis_camera(5.0);
  const SplatHomography h = build_homography(s, cam);
  const IntersectionFrame f = ray_splat_intersect(h, cam, Vec2(0, 0));
  REQUIRE(f.valid);
  CHECK(f.u == doctest::Approx(0.0));
  CHECK(f.v == doctest::Approx(0.0));
  CHECK(f.z == doctest::Approx(5.0));
}

TEST_CASE("edge-on splat is invalid") {
  Splat s = facing_splat(Vec3::Zero(), 1.0, 1.0);
  s.tangent_v = Vec3::UnitZ();
  const Camera cam = axis_camera(5.0);
  const IntersectionFrame f = ray_splat_intersect(build_homography(s, cam), cam, Vec2(0, 0));
  CHECK_FALSE(f.valid);
}

TEST_CASE("splat behind the camera is invalid") {
  const Splat s = facing_splat(Vec3(0, 0, 8), 1.0, 1.0);
  const Camera cam = axis_camera(5.0);
  CHECK_FALSE(ray_splat_intersect(build_homography(s, cam), cam, Vec2(0.01, 0.02)).valid);
}

TEST_CASE("off-center pixel matches the ray-plane oracle") {
  const Splat s = facing_splat(Vec3::Zero(), 1.0, 1.0);
  const Camera cam = axis_camera(5.0);
  const Vec2 plane = cam.pixel_to_plane(3, 11);
  const IntersectionFrame f = ray_splat_intersect(build_homography(s, cam), cam, plane);
  const Vec2 ref = ray_plane_oracle(s, cam, plane);
  REQUIRE(f.valid);
  CHECK(std::abs(f.u - ref.x()) < 1e-12);
  CHECK(std::abs(f.v - ref.y()) < 1e-12);
}

TEST_CASE("random intersections agree with the oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 2000; ++k) {
    Splat s;
    random_frame(rng, s.tangent_u, s.tangent_v);
    s.position = 0.5 * Vec3(uni(rng), uni(rng), uni(rng));
    s.scale_u = 0.2 + 0.5 * (uni(rng) + 1.0);
    s.scale_v = 0.2 + 0.5 * (uni(rng) + 1.0);
    const Camera cam =
        Camera::look_at(3.0 * random_unit(rng), Vec3::Zero(), random_unit(rng), 20, 32, 32);
    const Vec2 plane = cam.pixel_to_plane(static_cast<int>(16 + 15 * uni(rng)),
                                          static_cast<int>(16 + 15 * uni(rng)));
    const IntersectionFrame f = ray_splat_intersect(build_homography(s, cam), cam, plane);
    if (!f.valid) continue;
    const Vec2 ref = ray_plane_oracle(s, cam, plane);
    CHECK(std::abs(f.u - ref.x()) <= 1e-6 * std::max(1.0, std::abs(ref.x())));
    CHECK(std::abs(f.v - ref.y()) <= 1e-6 * std::max(1.0, std::abs(ref.y())));
    const Vec3 hit = s.position + f.u * s.scale_u * s.tangent_u + f.v * s.scale_v * s.tangent_v;
    CHECK(f.z == doctest::Approx((cam.world_to_view * hit.homogeneous()).z()).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("rigid motion of camera and splat leaves (u, v) unchanged") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    Splat s;
    random_frame(rng, s.tangent_u, s.tangent_v);
    s.position = 0.2 * random_unit(rng);
    s.scale_u = 0.7;
    s.scale_v = 0.4;
    Camera cam = Camera::look_at(3.0 * random_unit(rng), Vec3::Zero(), random_unit(rng), 20, 32, 32);
    const Vec2 plane = cam.pixel_to_plane(14, 18);
    const IntersectionFrame f0 = ray_splat_intersect(build_homography(s, cam), cam, plane);

    const Mat3 R = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    const Vec3 t = random_unit(rng);
    Mat4 M = Mat4::Identity();
    M.topLeftCorner<3, 3>() = R;
    M.topRightCorner<3, 1>() = t;
    Splat s2 = s;
    s2.position = R * s.position + t;
    s2.tangent_u = R * s.tangent_u;
    s2.tangent_v = R * s.tangent_v;
    Camera cam2 = cam;
    cam2.world_to_view = cam.world_to_view * M.inverse();
    const IntersectionFrame f1 = ray_splat_intersect(build_homography(s2, cam2), cam2, plane);
    REQUIRE(f0.valid == f1.valid);
    if (!f0.valid) continue;
    CHECK(f1.u == doctest::Approx(f0.u).epsilon(1e-9));
    CHECK(f1.v == doctest::Approx(f0.v).epsilon(1e-9));
  }
}

TEST_CASE("gaussian weight") {
  CHECK(gaussian_weight(0, 0) == 1.0);
  CHECK(gaussian_weight(std::sqrt(2.0), 0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(gaussian_weight(3, 3) == doctest::Approx(1.234e-4).epsilon(1e-3));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-4.0, 4.0);
  for (int k = 0; k < 100; ++k) {
    const double u = uni(rng), v = uni(rng);
    const double w = gaussian_weight(u, v);
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    CHECK(w == doctest::Approx(gaussian_weight(std::hypot(u, v), 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("geometric normal") {
  Splat s;
  CHECK(geometric_normal(s) == Vec3(0, 0, 1));
  s.tangent_u = Vec3::UnitY();
  s.tangent_v = Vec3::UnitX();
  CHECK(geometric_normal(s) == Vec3(0, 0, -1));

  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    random_frame(rng, s.tangent_u, s.tangent_v);
    s.scale_u = 1.0;
    s.scale_v = 1.0;
    const Vec3 n = geometric_normal(s);
    CHECK(std::abs(n.norm() - 1.0) < 1e-6);
    CHECK(std::abs(n.dot(s.tangent_u)) < 1e-6);
    CHECK(std::abs(n.dot(s.tangent_v)) < 1e-6);
    s.scale_u = 5.0;
    s.scale_v = 0.01;
    CHECK(geometric_normal(s) == n);
  }
}

TEST_CASE("effective opacity and cutoff") {
  Splat s = facing_splat(Vec3::Zero(), 1.0, 1.0);
  IntersectionFrame f;
  f.valid = true;
  CHECK(effective_opacity(s, f) == 1.0);
  s.opacity = 0.5;
  CHECK(effective_opacity(s, f) == 0.5);
  s.opacity = 1.0;
  f.u = 4.0;
  f.v = 4.0;
  CHECK(effective_opacity(s, f) == 0.0);
  f.u = f.v = 0.0;
  f.valid = false;
  CHECK(effective_opacity(s, f) == 0.0);

  const double r = cutoff_radius(0.8);
  CHECK(0.8 * gaussian_weight(r, 0) == doctest::Approx(kAlphaCutoff).epsilon(1e-9));
  CHECK(cutoff_radius(0.5 / 255.0) == 0.0);
}

TEST_CASE("invariants and re-orthonormalization") {
  Splat s;
  CHECK(satisfies_invariants(s));
  s.tangent_v = Vec3(0.3, 1.0, 0.2);
  CHECK_FALSE(satisfies_invariants(s));
  orthonormalize_frame(s);
  CHECK(satisfies_invariants(s));
  CHECK(s.tangent_u == Vec3::UnitX());
  s.opacity = 1.5;
  CHECK_FALSE(satisfies_invariants(s));
  s.opacity = 0.5;
  s.scale_u = 0.0;
  CHECK_FALSE(satisfies_invariants(s));
}

TEST_CASE("camera validity and pixel convention") {
  const Camera cam = axis_camera(5.0, 16, 8, 10.0);
  CHECK(cam.valid());
  const Vec2 c = cam.pixel_to_plane(0, 0);
  CHECK(c.x() == doctest::Approx((0.5 - cam.cx) / cam.fx));
  CHECK(c.y() == doctest::Approx((0.5 - cam.cy) / cam.fy));
  CHECK((cam.center() - Vec3(0, 0, 5)).norm() < 1e-12);
  Camera bad = cam;
  bad.near_plane = 2000.0;
  CHECK_FALSE(bad.valid());
  bad = cam;
  bad.world_to_view(0, 0) = 2.0;
  CHECK_FALSE(bad.valid());
}
