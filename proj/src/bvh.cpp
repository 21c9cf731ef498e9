#include "docsynth/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace docsynth {

namespace {

constexpr int kBins = 16;
constexpr int kMaxLeaf = 8;
constexpr double kTraversalCost = 0.5;
// Conservative slab bound scaling (pbrt's 1 + 2 * gamma(3)).
constexpr double kGamma3 = 3.0 * std::numeric_limits<double>::epsilon() * 0.5 /
                           (1.0 - 3.0 * std::numeric_limits<double>::epsilon() * 0.5);
constexpr double kFarScale = 1.0 + 2.0 * kGamma3;
constexpr double kTieScale = 1.0 + 8.0 * kGamma3;

}  // namespace

namespace bvh_detail {

struct Box {
  Vec3 lo{kInfinity, kInfinity, kInfinity};
  Vec3 hi{-kInfinity, -kInfinity, -kInfinity};

  void grow(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  void grow(const Box& b) {
    grow(b.lo);
    grow(b.hi);
  }
  bool empty() const { return lo.x > hi.x; }
  double area() const {
    if (empty()) return 0.0;
    const Vec3 d = hi - lo;
    return 2.0 * (d.x * d.y + d.y * d.z + d.z * d.x);
  }
};

struct BuildPrim {
  Box bounds;
  Vec3 centroid;
  std::uint32_t index;
};

}  // namespace bvh_detail

using bvh_detail::Box;
using bvh_detail::BuildPrim;

namespace {

// Per-ray constants for slab tests.
struct RaySlab {
  double inv[3];
  double origin[3];
  int near_side[3];  // 1 when the direction component is negative, including -0.0

  explicit RaySlab(const Ray& ray) {
    for (int a = 0; a < 3; ++a) {
      inv[a] = 1.0 / ray.direction[a];
      origin[a] = ray.origin[a];
      near_side[a] = std::signbit(ray.direction[a]) ? 1 : 0;
    }
  }
};

inline bool slab_test(const double (&bounds)[2][3], const RaySlab& r, double tmin, double tmax, double& tnear) {
  double t0 = tmin;
  double t1 = tmax;
  for (int axis = 0; axis < 3; ++axis) {
    const double a = (bounds[r.near_side[axis]][axis] - r.origin[axis]) * r.inv[axis];
    const double b = (bounds[1 - r.near_side[axis]][axis] - r.origin[axis]) * r.inv[axis] * kFarScale;
    // NaN (zero direction on a slab boundary) leaves the interval untouched.
    t0 = a > t0 ? a : t0;
    t1 = b < t1 ? b : t1;
  }
  tnear = t0;
  return t0 <= t1;
}

}  // namespace

struct Geometry::Builder {
  std::vector<Node>& nodes;
  std::vector<BuildPrim>& prims;

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
};

Geometry::Geometry(std::vector<TriangleMesh> meshes) : meshes_(std::move(meshes)) {
  for (std::uint32_t m = 0; m < meshes_.size(); ++m) {
    const auto& mesh = meshes_[m];
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec3& a = mesh.vertices[tri[0]];
      triangles_.push_back({a, mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a});
      tri_mesh_.push_back(m);
      tri_local_.push_back(t);
    }
  }
  build();
}

void Geometry::build() {
  nodes_.clear();
  ordered_.clear();
  ordered_index_.clear();
  if (triangles_.empty()) return;
  std::vector<BuildPrim> prims(triangles_.size());
  for (std::uint32_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    Box b;
    b.grow(t.v0);
    b.grow(t.v0 + t.e1);
    b.grow(t.v0 + t.e2);
    prims[i] = {b, (b.lo + b.hi) * 0.5, i};
  }
  nodes_.reserve(2 * prims.size());
  Builder{nodes_, prims}.build(0, static_cast<std::uint32_t>(prims.size()));
  ordered_.reserve(prims.size());
  ordered_index_.reserve(prims.size());
  for (const auto& p : prims) {
    ordered_.push_back(triangles_[p.index]);
    ordered_index_.push_back(p.index);
  }
}

std::uint32_t Geometry::Builder::build(std::uint32_t begin, std::uint32_t end) {
  const auto node_index = static_cast<std::uint32_t>(nodes.size());
  nodes.push_back({});
  Box bounds, centroids;
  for (std::uint32_t i = begin; i < end; ++i) {
    bounds.grow(prims[i].bounds);
    centroids.grow(prims[i].centroid);
  }
  const auto make_leaf = [&] {
    Node& n = nodes[node_index];
    for (int a = 0; a < 3; ++a) {
      n.bounds[0][a] = bounds.lo[a];
      n.bounds[1][a] = bounds.hi[a];
    }
    n.offset = begin;
    n.count = static_cast<std::uint16_t>(end - begin);
    n.axis = 0;
    return node_index;
  };
  const std::uint32_t count = end - begin;
  if (count <= 2) return make_leaf();

  // Binned SAH over all three axes.
  int best_axis = -1;
  int best_split = 0;
  double best_cost = kInfinity;
  for (int axis = 0; axis < 3; ++axis) {
    const double extent = centroids.hi[axis] - centroids.lo[axis];
    if (!(extent > 0.0)) continue;
    std::array<Box, kBins> bin_box{};
    std::array<std::uint32_t, kBins> bin_count{};
    const double scale = kBins / extent;
    for (std::uint32_t i = begin; i < end; ++i) {
      const int b = std::min(kBins - 1, static_cast<int>((prims[i].centroid[axis] - centroids.lo[axis]) * scale));
      bin_box[b].grow(prims[i].bounds);
      ++bin_count[b];
    }
    std::array<double, kBins> right_area{};
    std::array<std::uint32_t, kBins> right_count{};
    Box acc;
    std::uint32_t n = 0;
    for (int b = kBins - 1; b > 0; --b) {
      acc.grow(bin_box[b]);
      n += bin_count[b];
      right_area[b] = acc.area();
      right_count[b] = n;
    }
    acc = Box{};
    n = 0;
    for (int b = 0; b < kBins - 1; ++b) {
      acc.grow(bin_box[b]);
      n += bin_count[b];
      const double cost = acc.area() * n + right_area[b + 1] * right_count[b + 1];
      if (n > 0 && right_count[b + 1] > 0 && cost < best_cost) {
        best_cost = cost;
        best_axis = axis;
        best_split = b;
      }
    }
  }

  const double parent_area = bounds.area();
  const double split_cost = best_axis >= 0 && parent_area > 0.0 ? kTraversalCost + best_cost / parent_area : kInfinity;
  if (count <= kMaxLeaf && split_cost >= static_cast<double>(count)) return make_leaf();

  std::uint32_t mid;
  if (best_axis >= 0) {
    const double scale = kBins / (centroids.hi[best_axis] - centroids.lo[best_axis]);
    const double lo = centroids.lo[best_axis];
    auto* split = std::partition(prims.data() + begin, prims.data() + end, [&](const BuildPrim& p) {
      const int b = std::min(kBins - 1, static_cast<int>((p.centroid[best_axis] - lo) * scale));
      return b <= best_split;
    });
    mid = static_cast<std::uint32_t>(split - prims.data());
  } else {
    // Coincident centroids: split by index order.
    mid = begin + count / 2;
  }
  if (mid == begin || mid == end) mid = begin + count / 2;

  const int axis = std::max(best_axis, 0);
  build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& n = nodes[node_index];
  for (int a = 0; a < 3; ++a) {
    n.bounds[0][a] = bounds.lo[a];
    n.bounds[1][a] = bounds.hi[a];
  }
  n.offset = right;
  n.count = 0;
  n.axis = static_cast<std::uint8_t>(axis);
  return node_index;
}

std::optional<Hit> Geometry::intersect(const Ray& ray, double tmin, double tmax) const {
  if (nodes_.empty()) return std::nullopt;
  const RaySlab slab(ray);
  double best_t = tmax;
  double best_b1 = 0.0, best_b2 = 0.0;
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t stack[128];
  int top = 0;
  std::uint32_t current = 0;
  double tnear;
  if (!slab_test(nodes_[0].bounds, slab, tmin, best_t * kTieScale, tnear)) return std::nullopt;
  for (;;) {
    const Node& node = nodes_[current];
    if (node.count > 0) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        double t, b1, b2;
        if (intersect_triangle(ordered_[i], ray, tmin, best_t, t, b1, b2)) {
          const std::uint32_t g = ordered_index_[i];
          if (t < best_t || g < best) {
            best_t = t;
            best = g;
            best_b1 = b1;
            best_b2 = b2;
          }
        }
      }
    } else {
      std::uint32_t first = current + 1;
      std::uint32_t second = node.offset;
      if (slab.near_side[node.axis]) std::swap(first, second);
      double t_first, t_second;
      const double limit = best_t * kTieScale;
      const bool hit_first = slab_test(nodes_[first].bounds, slab, tmin, limit, t_first);
      const bool hit_second = slab_test(nodes_[second].bounds, slab, tmin, limit, t_second);
      if (hit_first && hit_second) {
        if (t_second < t_first) std::swap(first, second);
        stack[top++] = second;
        current = first;
        continue;
      }
      if (hit_first) {
        current = first;
        continue;
      }
      if (hit_second) {
        current = second;
        continue;
      }
    }
    // Pop until a node still worth visiting.
    bool found = false;
    while (top > 0) {
      const std::uint32_t candidate = stack[--top];
      if (slab_test(nodes_[candidate].bounds, slab, tmin, best_t * kTieScale, tnear)) {
        current = candidate;
        found = true;
        break;
      }
    }
    if (!found) break;
  }
  if (best == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return resolve(best, ray, best_t, best_b1, best_b2);
}

bool Geometry::occluded(const Ray& ray, double tmin, double tmax) const {
  if (nodes_.empty()) return false;
  const RaySlab slab(ray);
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    double tnear;
    if (!slab_test(node.bounds, slab, tmin, tmax, tnear)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        double t, b1, b2;
        if (intersect_triangle(ordered_[i], ray, tmin, tmax, t, b1, b2)) return true;
      }
    } else {
      stack[top++] = node.offset;
      stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    }
  }
  return false;
}

Hit Geometry::resolve(std::uint32_t global_index, const Ray& ray, double t, double b1, double b2) const {
  const auto& mesh = meshes_[tri_mesh_[global_index]];
  const auto& tri = mesh.triangles[tri_local_[global_index]];
  const auto& accel = triangles_[global_index];
  Hit hit;
  hit.t = t;
  hit.primitive = global_index;
  hit.mesh = tri_mesh_[global_index];
  hit.object_id = mesh.object_id;
  hit.point = ray.origin + ray.direction * t;
  const double b0 = 1.0 - b1 - b2;
  hit.uv = mesh.uvs[tri[0]] * b0 + mesh.uvs[tri[1]] * b1 + mesh.uvs[tri[2]] * b2;
  hit.normal = normalize(cross(accel.e1, accel.e2));
  return hit;
}

}  // namespace docsynth
