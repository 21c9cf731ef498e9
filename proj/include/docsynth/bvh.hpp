#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "docsynth/geometry.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

/// Minimum hit distance for every ray (camera, bounce, shadow), meters.
inline constexpr double kRayEpsilon = 1e-5;

struct TriangleAccel {
  Vec3 v0;
  Vec3 e1;
  Vec3 e2;
};

/// Moller-Trumbore with a 1e-12 barycentric slack so rays through shared
/// edges are not lost. Accepts tmin < t <= tmax.
inline bool intersect_triangle(const TriangleAccel& tri, const Ray& ray, double tmin, double tmax, double& t,
                               double& b1, double& b2) {
  constexpr double kSlack = 1e-12;
  const Vec3 pvec = cross(ray.direction, tri.e2);
  const double det = dot(tri.e1, pvec);
  if (det == 0.0) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - tri.v0;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < -kSlack || u > 1.0 + kSlack) return false;
  const Vec3 qvec = cross(tvec, tri.e1);
  const double v = dot(ray.direction, qvec) * inv_det;
  if (v < -kSlack || u + v > 1.0 + kSlack) return false;
  const double dist = dot(tri.e2, qvec) * inv_det;
  if (!(dist > tmin && dist <= tmax)) return false;
  t = dist;
  b1 = u;
  b2 = v;
  return true;
}

struct Hit {
  double t = 0.0;
  std::uint32_t primitive = 0;  // global triangle index (mesh order)
  std::uint32_t mesh = 0;
  std::uint8_t object_id = 0;
  Vec3 point;
  Vec2 uv;
  Vec3 normal;  // geometric, unit, follows triangle winding
};

/// Triangle soup of several meshes behind a binned-SAH bounding volume
/// hierarchy. Nearest-hit ties are broken toward the smaller global triangle
/// index, so results match an exhaustive scan exactly.
class Geometry {
 public:
  explicit Geometry(std::vector<TriangleMesh> meshes);

  std::optional<Hit> intersect(const Ray& ray, double tmin = kRayEpsilon, double tmax = kInfinity) const;
  bool occluded(const Ray& ray, double tmin, double tmax) const;

  std::size_t triangle_count() const { return triangles_.size(); }
  /// Triangle by global index (meshes concatenated in order).
  const TriangleAccel& triangle(std::size_t global_index) const { return triangles_[global_index]; }
  Hit resolve(std::uint32_t global_index, const Ray& ray, double t, double b1, double b2) const;

  const std::vector<TriangleMesh>& meshes() const { return meshes_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    double bounds[2][3];  // lo, hi
    std::uint32_t offset;  // first primitive (leaf) or second child (interior)
    std::uint16_t count;   // 0 for interior nodes
    std::uint8_t axis;
  };

  struct Builder;
  void build();

  std::vector<TriangleMesh> meshes_;
  std::vector<TriangleAccel> triangles_;
  std::vector<std::uint32_t> tri_mesh_;
  std::vector<std::uint32_t> tri_local_;
  // BVH leaf order: permuted copies for cache-friendly traversal.
  std::vector<TriangleAccel> ordered_;
  std::vector<std::uint32_t> ordered_index_;
  std::vector<Node> nodes_;
};

}  // namespace docsynth
