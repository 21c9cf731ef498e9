#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "docsynth/geometry.hpp"
#include "docsynth/render.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

inline constexpr int kFieldBoundarySamples = 64;
inline constexpr int kFieldInteriorSamples = 256;

/// Continuous pixel coordinates of a world point under the pinhole model
/// (lens jitter ignored). Throws GeometryError(kPointBehindCamera) when the
/// point's forward component is <= 0.
Vec2 project_point(const CameraModel& camera, const Vec3& p);

/// 3x3 document-plane (meters, origin at sheet center) to pixel map,
/// normalized so h[2][2] == 1.
struct Homography {
  std::array<std::array<double, 3>, 3> h{};

  Vec2 apply(Vec2 q) const;
  Homography inverse() const;
  double determinant() const;
  bool operator==(const Homography&) const = default;
};

/// Throws GeometryError(kNonPlanarSheet) when the sheet is not planar and
/// GeometryError(kDegenerateCamera) when the camera lies in the sheet plane.
Homography homography_doc_to_image(const CameraModel& camera, const std::optional<SheetPlane>& plane);

struct PixelBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  bool operator==(const PixelBox&) const = default;
};

struct ProjectedField {
  std::string name;
  std::vector<Vec2> polygon;  // projected boundary, counter-clockwise in uv
  PixelBox aabb;
  double visibility = 0.0;
  bool fully_in_frame = false;
  bool operator==(const ProjectedField&) const = default;
};

/// The 64 uv boundary sample points of a rect: 16 per edge starting at
/// (u0, v0) and walking (u0,v0) -> (u1,v0) -> (u1,v1) -> (u0,v1).
std::vector<Vec2> field_boundary_uv(const UvRect& rect);
/// 16x16 stratum centers of the rect.
std::vector<Vec2> field_interior_uv(const UvRect& rect);

/// Projects a field's uv rect through the (possibly deformed) sheet mesh.
/// Visibility traces from the camera center toward each interior sample
/// using `scene`'s geometry.
ProjectedField project_field(const CameraModel& camera, const TriangleMesh& mesh, const FieldAnnotation& field,
                             const PreparedScene& scene);
ProjectedField project_field(const CameraModel& camera, const UvMap& uv_map, const FieldAnnotation& field,
                             const PreparedScene& scene);

struct AngleLabel {
  double theta = 0.0;
  double sin_theta = 0.0;
  double cos_theta = 1.0;
  bool operator==(const AngleLabel&) const = default;
};

AngleLabel make_angle_label(double theta);

/// In-image rotation of the document: the angle from image-up to the
/// projection of the document's +v axis at the sheet center, positive
/// counter-clockwise as seen on screen (image y points down), in (-pi, pi].
/// Throws GeometryError(kDegenerateView) for edge-on views.
AngleLabel rotation_label(const CameraModel& camera, const TriangleMesh& mesh);
AngleLabel rotation_label(const CameraModel& camera, const UvMap& uv_map);

/// [pred_sin - sin(theta)]^2 + [pred_cos - cos(theta)]^2
double periodic_loss(double pred_sin, double pred_cos, double theta);

std::pair<double, double> encode_angle(double theta);
/// atan2(sin, cos) mapped to (-pi, pi]; throws GeometryError(kZeroVector) on (0, 0).
double decode_angle(double sin_value, double cos_value);

/// Wraps any angle into (-pi, pi].
double wrap_angle(double theta);

}  // namespace docsynth
