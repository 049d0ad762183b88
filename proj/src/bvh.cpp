#include "texsplat/bvh.hpp"

#include <array>
#include <limits>
#include <numeric>

namespace texsplat {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr int kBins = 12;

Eigen::AlignedBox3d triangle_box(const Triangle& t) {
  Eigen::AlignedBox3d box(t.v0);
  box.extend(t.v1);
  box.extend(t.v2);
  return box;
}

double half_area(const Eigen::AlignedBox3d& box) {
  if (box.isEmpty()) {
    return 0.0;
  }
  const Vec3 e = box.sizes();
  return e.x() * e.y() + e.y() * e.z() + e.z() * e.x();
}

bool ray_hits_box(const Eigen::AlignedBox3d& box, const Vec3& origin, const Vec3& inv_dir) {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min()[k] - origin[k]) * inv_dir[k];
    double t1 = (box.max()[k] - origin[k]) * inv_dir[k];
    if (std::isnan(t0) || std::isnan(t1)) {
      // Origin on a slab plane with a zero direction component.
      if (origin[k] < box.min()[k] || origin[k] > box.max()[k]) {
        return false;
      }
      continue;
    }
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) {
      return false;
    }
  }
  return true;
}

} // namespace

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Triangle& tri) {
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) {
    return std::nullopt;
  }
  const double inv_det = 1.0 / det;
  const Vec3 s = origin - tri.v0;
  const double b1 = s.dot(p) * inv_det;
  if (b1 < 0.0 || b1 > 1.0) {
    return std::nullopt;
  }
  const Vec3 q = s.cross(e1);
  const double b2 = dir.dot(q) * inv_det;
  if (b2 < 0.0 || b1 + b2 > 1.0) {
    return std::nullopt;
  }
  const double t = e2.dot(q) * inv_det;
  if (!(t > 0.0)) {
    return std::nullopt;
  }
  return t;
}

VisibilityMesh::VisibilityMesh(std::vector<Triangle> triangles) : triangles_(std::move(triangles)) {
  if (triangles_.empty()) {
    return;
  }
  order_.resize(triangles_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Vec3> centroids(triangles_.size());
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    centroids[i] = (triangles_[i].v0 + triangles_[i].v1 + triangles_[i].v2) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size());
  build(0, static_cast<std::uint32_t>(triangles_.size()), centroids);
}

std::uint32_t VisibilityMesh::build(std::uint32_t begin, std::uint32_t end,
                                    std::vector<Vec3>& centroids) {
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(triangle_box(triangles_[order_[i]]));
    centroid_box.extend(centroids[order_[i]]);
  }
  // Inflate so rounding in the triangle test can never fall outside the box.
  const double pad = 1e-9 * (1.0 + box.sizes().maxCoeff()) + 1e-12;
  box.min().array() -= pad;
  box.max().array() += pad;
  nodes_[index].box = box;

  const std::uint32_t count = end - begin;
  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const double lo = centroid_box.min()[axis];
  const double extent = centroid_box.max()[axis] - lo;
  if (count <= kLeafSize || extent <= 0.0) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }

  auto bin_of = [&](std::uint32_t tri) {
    const int b = static_cast<int>((centroids[tri][axis] - lo) / extent * kBins);
    return std::clamp(b, 0, kBins - 1);
  };
  std::array<Eigen::AlignedBox3d, kBins> bin_box;
  std::array<std::uint32_t, kBins> bin_count{};
  for (std::uint32_t i = begin; i < end; ++i) {
    const int b = bin_of(order_[i]);
    bin_box[b].extend(triangle_box(triangles_[order_[i]]));
    ++bin_count[b];
  }
  double best_cost = std::numeric_limits<double>::infinity();
  int best_split = 1;
  for (int split = 1; split < kBins; ++split) {
    Eigen::AlignedBox3d left;
    Eigen::AlignedBox3d right;
    std::uint32_t nl = 0;
    std::uint32_t nr = 0;
    for (int b = 0; b < split; ++b) {
      left.extend(bin_box[b]);
      nl += bin_count[b];
    }
    for (int b = split; b < kBins; ++b) {
      right.extend(bin_box[b]);
      nr += bin_count[b];
    }
    if (nl == 0 || nr == 0) {
      continue;
    }
    const double cost = half_area(left) * nl + half_area(right) * nr;
    if (cost < best_cost) {
      best_cost = cost;
      best_split = split;
    }
  }
  auto mid_it = std::partition(order_.begin() + begin, order_.begin() + end,
                               [&](std::uint32_t tri) { return bin_of(tri) < best_split; });
  std::uint32_t mid = static_cast<std::uint32_t>(mid_it - order_.begin());
  if (mid == begin || mid == end) {
    mid = begin + count / 2;
  }
  build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

bool VisibilityMesh::occluded(const Vec3& origin, const Vec3& dir) const {
  if (nodes_.empty()) {
    return false;
  }
  const Vec3 inv_dir = dir.cwiseInverse();
  std::array<std::uint32_t, 64> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t index = stack[--top];
    const Node& node = nodes_[index];
    if (!ray_hits_box(node.box, origin, inv_dir)) {
      continue;
    }
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (intersect_triangle(origin, dir, triangles_[order_[i]])) {
          return true;
        }
      }
      continue;
    }
    stack[top++] = index + 1;
    stack[top++] = node.first;
  }
  return false;
}

bool VisibilityMesh::occluded_brute_force(const Vec3& origin, const Vec3& dir) const {
  for (const Triangle& tri : triangles_) {
    if (intersect_triangle(origin, dir, tri)) {
      return true;
    }
  }
  return false;
}

bool VisibilityMesh::covers_all_triangles() const {
  std::vector<int> seen(triangles_.size(), 0);
  for (const Node& node : nodes_) {
    for (std::uint32_t i = node.first; node.count > 0 && i < node.first + node.count; ++i) {
      ++seen[order_[i]];
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; });
}

int visibility(const Vec3& origin, const Vec3& dir, const VisibilityMesh& mesh) {
  const Vec3 d = dir.normalized();
  return mesh.occluded(origin + kRayOffset * d, d) ? 0 : 1;
}

} // namespace texsplat
