#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "docsynth/geometry.hpp"

namespace docsynth {

/// Axis-aligned rectangle in document UV space. v = 1 is the top edge.
struct UvRect {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 1.0;
  double v1 = 1.0;
  bool operator==(const UvRect&) const = default;
};

struct FieldAnnotation {
  std::string name;
  UvRect uv_rect;
  bool operator==(const FieldAnnotation&) const = default;
};

struct SheetSpec {
  double width_m = 0.2159;
  double height_m = 0.2794;
  int grid_nx = 64;
  int grid_ny = 64;
  std::string texture;  // texture reference, see TextureCache
  std::vector<FieldAnnotation> fields;
  std::string class_label;
  bool operator==(const SheetSpec&) const = default;
};

struct SheetSize {
  double width_m;
  double height_m;
};

/// Named paper presets: "us-letter" and "a4".
std::optional<SheetSize> sheet_preset(const std::string& name);

/// Cylindrical bend of the sheet. The coordinate along the direction at
/// `axis_angle` (in the sheet plane, from +x) wraps onto a cylinder of
/// radius 1/curvature; positive curvature lifts the ends toward +z.
struct Bend {
  double curvature = 0.0;
  double axis_angle = 0.0;
  bool operator==(const Bend&) const = default;
};

/// Rigid rotation of everything left of the directed UV line about that line.
/// Positive dihedral lifts the folded part toward the sheet normal.
struct Fold {
  Vec2 point{0.5, 0.5};
  Vec2 direction{0.0, 1.0};
  double dihedral = 0.0;
  bool operator==(const Fold&) const = default;
};

/// Band-limited displacement along vertex normals.
struct Roughness {
  double amplitude_m = 0.0;
  double frequency = 4.0;  // cycles per sheet width
  std::uint64_t noise_seed = 0;
  bool operator==(const Roughness&) const = default;
};

using DeformOp = std::variant<Bend, Fold, Roughness>;

struct Deformation {
  std::vector<DeformOp> ops;
  bool operator==(const Deformation&) const = default;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Vec2> uvs;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::uint8_t object_id = 1;
};

/// Segmentation labels written to the seg pass.
namespace object_ids {
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kDocument = 1;
inline constexpr std::uint8_t kOccluder = 2;
inline constexpr std::uint8_t kExtraSheet = 3;
inline constexpr std::uint8_t kMiss = 255;
}  // namespace object_ids

struct CameraBasis {
  Vec3 right{1, 0, 0};
  Vec3 up{0, 1, 0};
  Vec3 forward{0, 0, -1};
  bool operator==(const CameraBasis&) const = default;
};

/// Pinhole or thin-lens camera. `orientation` is the unrolled basis; the
/// sensor is rotated by roll_theta about `forward` when generating rays and
/// projecting. Positive roll makes scene content appear rotated
/// counter-clockwise on screen.
struct CameraModel {
  int width = 512;
  int height = 512;
  double sensor_width_mm = 36.0;
  double focal_mm = 50.0;
  std::optional<double> f_number;
  double focus_distance_m = 1.0;
  Vec3 position{0, 0, 1};
  CameraBasis orientation;
  double roll_theta = 0.0;
  bool operator==(const CameraModel&) const = default;
};

/// Camera looking from `position` at `target`, with the unrolled up vector
/// taken from world +y projected off the view axis.
CameraModel look_at_camera(const Vec3& position, const Vec3& target, int width, int height);

struct PointEmitter {
  double intensity_w = 0.0;  // radiant power, emitted isotropically
  bool operator==(const PointEmitter&) const = default;
};

/// One-sided rectangle emitting toward LightSpec::normal.
struct AreaEmitter {
  double width_m = 0.0;
  double height_m = 0.0;
  Rgb radiance;
  bool operator==(const AreaEmitter&) const = default;
};

struct EnvironmentEmitter {
  Rgb radiance;
  bool operator==(const EnvironmentEmitter&) const = default;
};

struct LightSpec {
  std::variant<PointEmitter, AreaEmitter, EnvironmentEmitter> kind;
  Vec3 position;
  Vec3 normal{0, 0, -1};
  bool operator==(const LightSpec&) const = default;
};

struct ExtraSheet {
  Vec2 offset;  // meters, in the table plane
  double rotation = 0.0;
  double z = -0.0005;
  bool operator==(const ExtraSheet&) const = default;
};

enum class OccluderShape { kQuad, kBox };

/// Opaque blocker. Quads are horizontal (normal +z) at center.z; boxes span
/// size.z vertically around center.z.
struct Occluder {
  OccluderShape shape = OccluderShape::kBox;
  Vec3 center;
  Vec3 size{0.05, 0.05, 0.01};
  double yaw = 0.0;
  Rgb albedo{0.3, 0.3, 0.3};
  bool operator==(const Occluder&) const = default;
};

struct BackgroundSpec {
  std::string surface = "wood";  // texture reference for the table plane
  double table_z = -0.002;
  double table_extent_m = 4.0;
  double texture_tile_m = 0.5;
  std::vector<ExtraSheet> extra_sheets;
  std::vector<Occluder> occluders;
  bool operator==(const BackgroundSpec&) const = default;
};

struct RenderSettings {
  int spp = 16;
  int max_depth = 4;
  int tile = 32;
  bool operator==(const RenderSettings&) const = default;
};

enum class MorphOp { kErode, kDilate };

/// Classical style noise applied to the document texture before rendering.
struct StyleNoise {
  double sigma = 0.0;
  std::optional<MorphOp> morph;
  int morph_radius = 1;
  bool operator==(const StyleNoise&) const = default;
};

struct ContentPatch {
  std::string texture;
  UvRect rect;
  std::string field_name;
  bool operator==(const ContentPatch&) const = default;
};

struct SceneInstance {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::string base_document;
  SheetSpec sheet;
  Deformation deformation;
  CameraModel camera;
  std::vector<LightSpec> lights;
  BackgroundSpec background;
  RenderSettings render;
  StyleNoise style;
  std::optional<ContentPatch> patch;
  std::map<std::string, std::string> categorical_choices;
  std::map<std::string, double> continuous_values;
  bool operator==(const SceneInstance&) const = default;
};

void validate(const UvRect& rect);
void validate(const SheetSpec& sheet);
void validate(const Deformation& deformation);
void validate(const CameraModel& camera);
void validate(const RenderSettings& settings);
/// Structural invariants of a resolved scene (lights, camera, occluders).
void validate(const SceneInstance& scene);

TriangleMesh build_sheet_mesh(const SheetSpec& sheet);

/// Applies the operations in listed order, then recomputes normals.
TriangleMesh apply_deformation(const TriangleMesh& mesh, const Deformation& deformation);

/// Area-weighted vertex normals.
void recompute_normals(TriangleMesh& mesh);

/// Supporting plane of a planar sheet plus its in-plane document axes.
/// Document-plane coordinates (a, b) in meters map to
/// origin + a * u_axis + b * v_axis.
struct SheetPlane {
  Vec3 origin;
  Vec3 normal;
  Vec3 u_axis;
  Vec3 v_axis;
  double width_m = 0.0;
  double height_m = 0.0;

  Vec3 world_from_doc(double a, double b) const { return origin + u_axis * a + v_axis * b; }
  Vec3 world_from_uv(double u, double v) const {
    return world_from_doc((u - 0.5) * width_m, (v - 0.5) * height_m);
  }
};

inline constexpr double kPlanarityTolerance = 1e-6;

/// Best-fit plane when every vertex is within 1e-6 m of it, otherwise nullopt.
std::optional<SheetPlane> sheet_plane(const TriangleMesh& mesh);

/// UV -> world lookup through the containing triangle (barycentric).
class UvMap {
 public:
  explicit UvMap(const TriangleMesh& mesh);

  /// nullopt when (u, v) lies in no triangle.
  std::optional<Vec3> world(Vec2 uv) const;
  /// Index of a triangle whose UV footprint contains the point.
  std::optional<std::size_t> locate(Vec2 uv) const;

 private:
  TriangleMesh mesh_;
  int cells_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

}  // namespace docsynth
