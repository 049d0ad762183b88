#pragma once

#include "texsplat/math.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace texsplat {

struct Triangle {
  Vec3 v0;
  Vec3 v1;
  Vec3 v2;
};

/// Moller-Trumbore; returns the ray parameter of a hit with t > 0.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri);

/// Ray-origin offset along the query direction to avoid self hits.
inline constexpr double kRayOffset = 1e-4;

/// Triangle soup with a binned-SAH bounding volume hierarchy for
/// any-hit occlusion queries.
class VisibilityMesh {
 public:
  VisibilityMesh() = default;
  explicit VisibilityMesh(std::vector<Triangle> triangles);

  const std::vector<Triangle>& triangles() const { return triangles_; }
  bool empty() const { return triangles_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  /// True if the ray hits any triangle at t > 0. No origin offset applied.
  bool occluded(const Vec3& origin, const Vec3& dir) const;
  bool occluded_brute_force(const Vec3& origin, const Vec3& dir) const;

  /// Every triangle index appears in exactly one leaf.
  bool covers_all_triangles() const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t first = 0;  // leaf: first triangle slot; inner: right child index
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  std::vector<Triangle> triangles_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// 0 if the ray from origin + kRayOffset * dir along dir is blocked, else 1.
int visibility(const Vec3& origin, const Vec3& dir, const VisibilityMesh& mesh);

} // namespace texsplat
