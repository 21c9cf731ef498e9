#include "docsynth/groundtruth.hpp"

#include <algorithm>
#include <cmath>

#include "docsynth/camera.hpp"
#include "docsynth/errors.hpp"

namespace docsynth {

namespace {

struct CameraPoint {
  double x, y, z;  // along sensor right, up, forward
};

CameraPoint to_camera(const SensorFrame& f, const Vec3& position, const Vec3& p) {
  const Vec3 d = p - position;
  return {dot(d, f.right), dot(d, f.up), dot(d, f.forward)};
}

bool in_frame(const CameraModel& camera, Vec2 px) {
  return px.x >= 0.0 && px.x < camera.width && px.y >= 0.0 && px.y < camera.height;
}

// Tangent step in uv for the central difference of the +v direction.
constexpr double kTangentStep = 1e-4;

}  // namespace

Vec2 project_point(const CameraModel& camera, const Vec3& p) {
  const SensorFrame f = sensor_frame(camera);
  const CameraPoint c = to_camera(f, camera.position, p);
  if (!(c.z > 0.0)) throw GeometryError(GeometryErrorKind::kPointBehindCamera, "point is not in front of the camera");
  return {f.cx + f.focal_px * c.x / c.z, f.cy - f.focal_px * c.y / c.z};
}

Vec2 Homography::apply(Vec2 q) const {
  const double x = h[0][0] * q.x + h[0][1] * q.y + h[0][2];
  const double y = h[1][0] * q.x + h[1][1] * q.y + h[1][2];
  const double w = h[2][0] * q.x + h[2][1] * q.y + h[2][2];
  return {x / w, y / w};
}

double Homography::determinant() const {
  return h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
         h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
}

Homography Homography::inverse() const {
  const double det = determinant();
  if (std::abs(det) <= 1e-12) throw GeometryError(GeometryErrorKind::kDegenerateCamera, "homography is singular");
  Homography inv;
  auto& r = inv.h;
  r[0][0] = h[1][1] * h[2][2] - h[1][2] * h[2][1];
  r[0][1] = h[0][2] * h[2][1] - h[0][1] * h[2][2];
  r[0][2] = h[0][1] * h[1][2] - h[0][2] * h[1][1];
  r[1][0] = h[1][2] * h[2][0] - h[1][0] * h[2][2];
  r[1][1] = h[0][0] * h[2][2] - h[0][2] * h[2][0];
  r[1][2] = h[0][2] * h[1][0] - h[0][0] * h[1][2];
  r[2][0] = h[1][0] * h[2][1] - h[1][1] * h[2][0];
  r[2][1] = h[0][1] * h[2][0] - h[0][0] * h[2][1];
  r[2][2] = h[0][0] * h[1][1] - h[0][1] * h[1][0];
  // Projective scale is arbitrary; prefer r22 = 1 and fall back to 1/det.
  const double scale = std::abs(r[2][2]) > 1e-300 ? r[2][2] : det;
  for (auto& row : r)
    for (auto& v : row) v /= scale;
  return inv;
}

Homography homography_doc_to_image(const CameraModel& camera, const std::optional<SheetPlane>& plane) {
  if (!plane) throw GeometryError(GeometryErrorKind::kNonPlanarSheet, "sheet is not planar");
  const SensorFrame f = sensor_frame(camera);
  const double height = dot(camera.position - plane->origin, plane->normal);
  if (std::abs(height) < 1e-9) throw GeometryError(GeometryErrorKind::kDegenerateCamera, "camera lies in the sheet plane");
  // Columns in camera coordinates: u axis, v axis, sheet origin.
  const Vec3 o = plane->origin - camera.position;
  const double m[3][3] = {
      {dot(f.right, plane->u_axis), dot(f.right, plane->v_axis), dot(f.right, o)},
      {dot(f.up, plane->u_axis), dot(f.up, plane->v_axis), dot(f.up, o)},
      {dot(f.forward, plane->u_axis), dot(f.forward, plane->v_axis), dot(f.forward, o)},
  };
  Homography out;
  for (int c = 0; c < 3; ++c) {
    out.h[0][c] = f.focal_px * m[0][c] + f.cx * m[2][c];
    out.h[1][c] = -f.focal_px * m[1][c] + f.cy * m[2][c];
    out.h[2][c] = m[2][c];
  }
  // h22 is the forward depth of the sheet origin.
  const double scale = out.h[2][2];
  if (std::abs(scale) < 1e-12) throw GeometryError(GeometryErrorKind::kDegenerateCamera, "sheet origin lies in the camera's focal plane");
  for (auto& row : out.h)
    for (auto& v : row) v /= scale;
  return out;
}

std::vector<Vec2> field_boundary_uv(const UvRect& r) {
  constexpr int kPerEdge = kFieldBoundarySamples / 4;
  const Vec2 corners[4] = {{r.u0, r.v0}, {r.u1, r.v0}, {r.u1, r.v1}, {r.u0, r.v1}};
  std::vector<Vec2> out;
  out.reserve(kFieldBoundarySamples);
  for (int e = 0; e < 4; ++e) {
    const Vec2 a = corners[e];
    const Vec2 b = corners[(e + 1) % 4];
    for (int i = 0; i < kPerEdge; ++i) {
      const double t = static_cast<double>(i) / kPerEdge;
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

std::vector<Vec2> field_interior_uv(const UvRect& r) {
  constexpr int kSide = 16;
  std::vector<Vec2> out;
  out.reserve(kFieldInteriorSamples);
  for (int j = 0; j < kSide; ++j)
    for (int i = 0; i < kSide; ++i)
      out.push_back({r.u0 + (r.u1 - r.u0) * (i + 0.5) / kSide, r.v0 + (r.v1 - r.v0) * (j + 0.5) / kSide});
  return out;
}

ProjectedField project_field(const CameraModel& camera, const TriangleMesh& mesh, const FieldAnnotation& field,
                             const PreparedScene& scene) {
  return project_field(camera, UvMap(mesh), field, scene);
}

ProjectedField project_field(const CameraModel& camera, const UvMap& uv_map, const FieldAnnotation& field,
                             const PreparedScene& scene) {
  validate(field.uv_rect);
  ProjectedField out;
  out.name = field.name;
  out.fully_in_frame = true;
  const SensorFrame f = sensor_frame(camera);

  for (const Vec2 uv : field_boundary_uv(field.uv_rect)) {
    const auto world = uv_map.world(uv);
    if (!world || !(to_camera(f, camera.position, *world).z > 0.0)) {
      out.fully_in_frame = false;
      continue;
    }
    const Vec2 px = project_point(camera, *world);
    out.fully_in_frame = out.fully_in_frame && in_frame(camera, px);
    out.polygon.push_back(px);
  }
  if (!out.polygon.empty()) {
    out.aabb = {out.polygon[0].x, out.polygon[0].y, out.polygon[0].x, out.polygon[0].y};
    for (const Vec2& p : out.polygon) {
      out.aabb.x0 = std::min(out.aabb.x0, p.x);
      out.aabb.y0 = std::min(out.aabb.y0, p.y);
      out.aabb.x1 = std::max(out.aabb.x1, p.x);
      out.aabb.y1 = std::max(out.aabb.y1, p.y);
    }
  }

  int visible = 0;
  for (const Vec2 uv : field_interior_uv(field.uv_rect)) {
    const auto world = uv_map.world(uv);
    if (!world || !(to_camera(f, camera.position, *world).z > 0.0)) continue;
    if (!in_frame(camera, project_point(camera, *world))) continue;
    const Vec3 d = *world - camera.position;
    const double dist = length(d);
    const Ray ray{camera.position, d / dist};
    if (scene.geometry && scene.geometry->occluded(ray, kRayEpsilon, dist - 1e-4)) continue;
    ++visible;
  }
  out.visibility = static_cast<double>(visible) / kFieldInteriorSamples;
  return out;
}

AngleLabel make_angle_label(double theta) {
  const double t = wrap_angle(theta);
  return {t, std::sin(t), std::cos(t)};
}

AngleLabel rotation_label(const CameraModel& camera, const TriangleMesh& mesh) {
  return rotation_label(camera, UvMap(mesh));
}

AngleLabel rotation_label(const CameraModel& camera, const UvMap& uv_map) {
  const auto center = uv_map.world({0.5, 0.5});
  // One-sided step: the center is usually a mesh vertex, and the +v grid edge
  // leaving it is straight even when the sheet is bent or folded there.
  const auto above = uv_map.world({0.5, 0.5 + kTangentStep});
  if (!center || !above) throw GeometryError(GeometryErrorKind::kDegenerateView, "sheet center has no surface");
  const SensorFrame f = sensor_frame(camera);
  const CameraPoint c = to_camera(f, camera.position, *center);
  if (!(c.z > 0.0)) throw GeometryError(GeometryErrorKind::kPointBehindCamera, "sheet center is behind the camera");
  const Vec3 t = normalize(*above - *center);
  const CameraPoint dt{dot(t, f.right), dot(t, f.up), dot(t, f.forward)};
  // Jacobian of the pixel projection at the center applied to the tangent.
  const double dx = f.focal_px * (dt.x * c.z - c.x * dt.z) / (c.z * c.z);
  const double dy = -f.focal_px * (dt.y * c.z - c.y * dt.z) / (c.z * c.z);
  if (std::hypot(dx, dy) < 1e-9 * f.focal_px / c.z)
    throw GeometryError(GeometryErrorKind::kDegenerateView, "document up vector projects to a point");
  // Image up is (0, -1); counter-clockwise on screen rotates it to (-sin, -cos).
  return make_angle_label(std::atan2(-dx, -dy));
}

double periodic_loss(double pred_sin, double pred_cos, double theta) {
  const double ds = pred_sin - std::sin(theta);
  const double dc = pred_cos - std::cos(theta);
  return ds * ds + dc * dc;
}

std::pair<double, double> encode_angle(double theta) { return {std::sin(theta), std::cos(theta)}; }

double decode_angle(double sin_value, double cos_value) {
  if (sin_value == 0.0 && cos_value == 0.0) throw GeometryError(GeometryErrorKind::kZeroVector, "cannot decode a zero vector");
  return wrap_angle(std::atan2(sin_value, cos_value));
}

double wrap_angle(double theta) {
  if (theta > -kPi && theta <= kPi) return theta;
  double t = std::remainder(theta, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

}  // namespace docsynth
