#include "docsynth/scene.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "docsynth/errors.hpp"
#include "docsynth/rng.hpp"

namespace docsynth {

std::optional<SheetSize> sheet_preset(const std::string& name) {
  if (name == "us-letter") return SheetSize{0.2159, 0.2794};
  if (name == "a4") return SheetSize{0.210, 0.297};
  return std::nullopt;
}

CameraModel look_at_camera(const Vec3& position, const Vec3& target, int width, int height) {
  const Vec3 view = target - position;
  if (length(view) <= 0.0) throw GeometryError(GeometryErrorKind::kDegenerateCamera, "camera position equals target");
  const Vec3 forward = normalize(view);
  const Vec3 world_up{0, 1, 0};
  const Vec3 up0 = world_up - forward * dot(forward, world_up);
  if (length(up0) < 1e-9) {
    throw GeometryError(GeometryErrorKind::kDegenerateCamera, "view direction parallel to world up");
  }
  CameraModel camera;
  camera.width = width;
  camera.height = height;
  camera.position = position;
  camera.orientation.forward = forward;
  camera.orientation.up = normalize(up0);
  camera.orientation.right = cross(forward, camera.orientation.up);
  camera.focus_distance_m = length(view);
  return camera;
}

void validate(const UvRect& r) {
  const bool ok = r.u0 >= 0.0 && r.u0 < r.u1 && r.u1 <= 1.0 && r.v0 >= 0.0 && r.v0 < r.v1 && r.v1 <= 1.0;
  if (!ok) throw InvalidArgument("uv rect must satisfy 0 <= u0 < u1 <= 1 and 0 <= v0 < v1 <= 1");
}

void validate(const SheetSpec& sheet) {
  if (!(sheet.width_m > 0.0) || !(sheet.height_m > 0.0) || !std::isfinite(sheet.width_m) ||
      !std::isfinite(sheet.height_m)) {
    throw InvalidArgument("sheet dimensions must be positive");
  }
  if (sheet.grid_nx < 1 || sheet.grid_ny < 1) throw InvalidArgument("sheet grid must be at least 1x1");
  std::set<std::string> names;
  for (const auto& field : sheet.fields) {
    validate(field.uv_rect);
    if (!names.insert(field.name).second) throw InvalidArgument("duplicate field name '" + field.name + "'");
  }
}

void validate(const Deformation& deformation) {
  for (const auto& op : deformation.ops) {
    if (const auto* bend = std::get_if<Bend>(&op)) {
      if (!std::isfinite(bend->curvature) || !std::isfinite(bend->axis_angle))
        throw InvalidArgument("bend parameters must be finite");
    } else if (const auto* fold = std::get_if<Fold>(&op)) {
      if (!(std::abs(fold->dihedral) < kPi)) throw InvalidArgument("fold dihedral must satisfy |dihedral| < pi");
      if (fold->direction.x == 0.0 && fold->direction.y == 0.0)
        throw InvalidArgument("fold direction must be nonzero");
    } else if (const auto* rough = std::get_if<Roughness>(&op)) {
      if (!(rough->amplitude_m >= 0.0) || !std::isfinite(rough->amplitude_m) || !std::isfinite(rough->frequency))
        throw InvalidArgument("roughness amplitude must be finite and >= 0");
    }
  }
}

void validate(const CameraModel& camera) {
  const auto& b = camera.orientation;
  if (length(b.right) == 0.0 || length(b.up) == 0.0 || length(b.forward) == 0.0) {
    throw GeometryError(GeometryErrorKind::kDegenerateCamera, "camera basis has a zero-length vector");
  }
  const std::array<Vec3, 3> axes{b.right, b.up, b.forward};
  double residual = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) residual = std::max(residual, std::abs(dot(axes[i], axes[j]) - (i == j ? 1.0 : 0.0)));
  if (!(residual < 1e-9)) throw GeometryError(GeometryErrorKind::kDegenerateCamera, "camera basis is not orthonormal");
  if (camera.width < 1 || camera.height < 1) throw InvalidArgument("camera resolution must be positive");
  if (!(camera.focal_mm > 0.0) || !(camera.sensor_width_mm > 0.0))
    throw InvalidArgument("focal length and sensor width must be positive");
  if (camera.f_number && (!(*camera.f_number > 0.0) || !(camera.focus_distance_m > 0.0)))
    throw InvalidArgument("thin-lens camera needs positive f-number and focus distance");
  if (!(camera.roll_theta > -kPi && camera.roll_theta <= kPi)) throw InvalidArgument("roll_theta must lie in (-pi, pi]");
}

void validate(const RenderSettings& settings) {
  if (settings.spp < 1) throw InvalidArgument("spp must be >= 1");
  if (settings.max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  if (settings.tile < 8) throw InvalidArgument("tile must be >= 8");
}

namespace {

bool nonnegative(const Rgb& c) {
  return c.x >= 0.0 && c.y >= 0.0 && c.z >= 0.0 && std::isfinite(c.x) && std::isfinite(c.y) && std::isfinite(c.z);
}

bool occluder_contains(const Occluder& occ, const Vec3& p) {
  const Vec3 d = p - occ.center;
  const double c = std::cos(occ.yaw);
  const double s = std::sin(occ.yaw);
  const double lx = c * d.x + s * d.y;
  const double ly = -s * d.x + c * d.y;
  const bool in_plane = std::abs(lx) <= occ.size.x / 2 && std::abs(ly) <= occ.size.y / 2;
  if (occ.shape == OccluderShape::kQuad) return in_plane && std::abs(d.z) < 1e-9;
  return in_plane && std::abs(d.z) <= occ.size.z / 2;
}

}  // namespace

void validate(const SceneInstance& scene) {
  validate(scene.sheet);
  validate(scene.deformation);
  validate(scene.camera);
  validate(scene.render);
  if (scene.lights.empty()) throw InvalidArgument("scene needs at least one light");
  for (const auto& light : scene.lights) {
    bool ok = true;
    if (const auto* p = std::get_if<PointEmitter>(&light.kind)) ok = p->intensity_w >= 0.0 && std::isfinite(p->intensity_w);
    if (const auto* a = std::get_if<AreaEmitter>(&light.kind))
      ok = nonnegative(a->radiance) && a->width_m > 0.0 && a->height_m > 0.0 && std::abs(length(light.normal) - 1.0) < 1e-9;
    if (const auto* e = std::get_if<EnvironmentEmitter>(&light.kind)) ok = nonnegative(e->radiance);
    if (!ok) throw InvalidArgument("light radiometric values must be finite and >= 0");
  }
  for (const auto& occ : scene.background.occluders) {
    if (!nonnegative(occ.albedo)) throw InvalidArgument("occluder albedo must be >= 0");
    if (occluder_contains(occ, scene.camera.position)) throw InvalidArgument("occluder contains the camera origin");
  }
  if (scene.style.sigma < 0.0 || scene.style.morph_radius < 1) throw InvalidArgument("invalid style noise");
  if (scene.patch) validate(scene.patch->rect);
}

TriangleMesh build_sheet_mesh(const SheetSpec& sheet) {
  validate(sheet);
  const int nx = sheet.grid_nx;
  const int ny = sheet.grid_ny;
  TriangleMesh mesh;
  mesh.object_id = object_ids::kDocument;
  const std::size_t vertex_count = static_cast<std::size_t>(nx + 1) * (ny + 1);
  mesh.vertices.reserve(vertex_count);
  mesh.uvs.reserve(vertex_count);
  for (int j = 0; j <= ny; ++j) {
    const double v = static_cast<double>(j) / ny;
    for (int i = 0; i <= nx; ++i) {
      const double u = static_cast<double>(i) / nx;
      mesh.vertices.push_back({(u - 0.5) * sheet.width_m, (v - 0.5) * sheet.height_m, 0.0});
      mesh.uvs.push_back({u, v});
    }
  }
  mesh.normals.assign(vertex_count, Vec3{0, 0, 1});
  mesh.triangles.reserve(static_cast<std::size_t>(2) * nx * ny);
  const auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      // Counter-clockwise seen from +z.
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

void recompute_normals(TriangleMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size());
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3 n = cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a);
    for (auto idx : tri) acc[idx] += n;
  }
  mesh.normals.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double len = length(acc[i]);
    mesh.normals[i] = len > 0.0 ? acc[i] / len : Vec3{0, 0, 1};
  }
}

namespace {

void apply_bend(TriangleMesh& mesh, const Bend& bend) {
  if (bend.curvature == 0.0) return;
  const double radius = 1.0 / bend.curvature;
  const double ax = std::cos(bend.axis_angle);
  const double ay = std::sin(bend.axis_angle);
  for (auto& p : mesh.vertices) {
    const double s = p.x * ax + p.y * ay;
    const double h = p.z;
    const double angle = s / radius;
    const double s_new = (radius - h) * std::sin(angle);
    const double h_new = radius - (radius - h) * std::cos(angle);
    p.x += ax * (s_new - s);
    p.y += ay * (s_new - s);
    p.z = h_new;
  }
}

// Parameter range [t0, t1] of point + t * dir inside the unit square.
std::optional<std::pair<double, double>> clip_to_unit_square(Vec2 point, Vec2 dir) {
  double t0 = -kInfinity;
  double t1 = kInfinity;
  for (int axis = 0; axis < 2; ++axis) {
    const double o = axis == 0 ? point.x : point.y;
    const double d = axis == 0 ? dir.x : dir.y;
    if (d == 0.0) {
      if (o < 0.0 || o > 1.0) return std::nullopt;
      continue;
    }
    double a = (0.0 - o) / d;
    double b = (1.0 - o) / d;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (!(t1 > t0)) return std::nullopt;
  return std::make_pair(t0, t1);
}

void apply_fold(TriangleMesh& mesh, const Fold& fold) {
  if (fold.dihedral == 0.0) return;
  const auto span = clip_to_unit_square(fold.point, fold.direction);
  if (!span) return;
  const UvMap uv_map(mesh);
  const auto a = uv_map.world(fold.point + fold.direction * span->first);
  const auto b = uv_map.world(fold.point + fold.direction * span->second);
  if (!a || !b || length(*b - *a) == 0.0) return;
  const Vec3 k = normalize(*b - *a);
  const double c = std::cos(fold.dihedral);
  const double s = std::sin(fold.dihedral);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!(cross2(fold.direction, mesh.uvs[i] - fold.point) > 0.0)) continue;
    const Vec3 r = mesh.vertices[i] - *a;
    // Rodrigues rotation about k through a.
    const Vec3 rotated = r * c + cross(k, r) * s + k * (dot(k, r) * (1.0 - c));
    mesh.vertices[i] = *a + rotated;
  }
}

void apply_roughness(TriangleMesh& mesh, const Roughness& rough) {
  if (rough.amplitude_m == 0.0) return;
  constexpr int kWaves = 8;
  struct Wave {
    double kx, ky, phase;
  };
  std::array<Wave, kWaves> waves{};
  RngStream rng(StreamKey{rough.noise_seed}.derive("roughness"));
  for (auto& w : waves) {
    const double angle = 2.0 * kPi * rng.uniform();
    const double freq = rough.frequency * (0.5 + 0.5 * rng.uniform());
    w = {2.0 * kPi * freq * std::cos(angle), 2.0 * kPi * freq * std::sin(angle), 2.0 * kPi * rng.uniform()};
  }
  // RMS of a sum of K unit cosines with random phases is sqrt(K / 2).
  const double norm = std::sqrt(kWaves / 2.0);
  recompute_normals(mesh);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec2 uv = mesh.uvs[i];
    double h = 0.0;
    for (const auto& w : waves) h += std::cos(w.kx * uv.x + w.ky * uv.y + w.phase);
    mesh.vertices[i] += mesh.normals[i] * (rough.amplitude_m * h / norm);
  }
}

}  // namespace

TriangleMesh apply_deformation(const TriangleMesh& mesh, const Deformation& deformation) {
  validate(deformation);
  TriangleMesh out = mesh;
  for (const auto& op : deformation.ops) {
    std::visit(
        [&out](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Bend>) apply_bend(out, o);
          if constexpr (std::is_same_v<T, Fold>) apply_fold(out, o);
          if constexpr (std::is_same_v<T, Roughness>) apply_roughness(out, o);
        },
        op);
  }
  recompute_normals(out);
  return out;
}

std::optional<SheetPlane> sheet_plane(const TriangleMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
  if (n < 3) return std::nullopt;
  Eigen::MatrixX3d points(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = mesh.vertices[static_cast<std::size_t>(i)];
    points.row(i) << p.x, p.y, p.z;
  }
  const Eigen::RowVector3d centroid = points.colwise().mean();
  const Eigen::MatrixX3d centered = points.rowwise() - centroid;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(centered.transpose() * centered);
  Eigen::Vector3d normal = solver.eigenvectors().col(0);
  if ((centered * normal).cwiseAbs().maxCoeff() >= kPlanarityTolerance) return std::nullopt;

  Vec3 mean_normal;
  for (const auto& nv : mesh.normals) mean_normal += nv;
  if (Eigen::Vector3d(mean_normal.x, mean_normal.y, mean_normal.z).dot(normal) < 0.0) normal = -normal;

  // Affine fit world = origin + (u - 1/2) du + (v - 1/2) dv.
  Eigen::MatrixX3d design(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& uv = mesh.uvs[static_cast<std::size_t>(i)];
    design.row(i) << uv.x - 0.5, uv.y - 0.5, 1.0;
  }
  const Eigen::Matrix3d fit = design.colPivHouseholderQr().solve(points);
  const auto to_vec = [](const Eigen::RowVector3d& r) { return Vec3{r(0), r(1), r(2)}; };
  SheetPlane plane;
  const Vec3 du = to_vec(fit.row(0));
  const Vec3 dv = to_vec(fit.row(1));
  plane.origin = to_vec(fit.row(2));
  plane.normal = {normal(0), normal(1), normal(2)};
  plane.width_m = length(du);
  plane.height_m = length(dv);
  if (plane.width_m == 0.0 || plane.height_m == 0.0) return std::nullopt;
  plane.u_axis = du / plane.width_m;
  plane.v_axis = dv / plane.height_m;
  return plane;
}

namespace {

constexpr double kBarycentricSlack = 1e-12;

std::optional<std::array<double, 3>> uv_barycentric(const TriangleMesh& mesh, std::size_t tri, Vec2 p) {
  const auto& t = mesh.triangles[tri];
  const Vec2 a = mesh.uvs[t[0]];
  const Vec2 b = mesh.uvs[t[1]];
  const Vec2 c = mesh.uvs[t[2]];
  const double d = cross2(b - a, c - a);
  if (d == 0.0) return std::nullopt;
  const double w1 = cross2(p - a, c - a) / d;
  const double w2 = cross2(b - a, p - a) / d;
  const double w0 = 1.0 - w1 - w2;
  if (w0 < -kBarycentricSlack || w1 < -kBarycentricSlack || w2 < -kBarycentricSlack) return std::nullopt;
  return std::array<double, 3>{w0, w1, w2};
}

}  // namespace

UvMap::UvMap(const TriangleMesh& mesh) : mesh_(mesh) {
  cells_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()) / 2.0)), 1, 256);
  buckets_.resize(static_cast<std::size_t>(cells_) * cells_);
  const auto cell_of = [this](double x) { return std::clamp(static_cast<int>(std::floor(x * cells_)), 0, cells_ - 1); };
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    double u_lo = kInfinity, v_lo = kInfinity, u_hi = -kInfinity, v_hi = -kInfinity;
    for (auto idx : mesh.triangles[t]) {
      u_lo = std::min(u_lo, mesh.uvs[idx].x);
      u_hi = std::max(u_hi, mesh.uvs[idx].x);
      v_lo = std::min(v_lo, mesh.uvs[idx].y);
      v_hi = std::max(v_hi, mesh.uvs[idx].y);
    }
    // Widen by one cell so points on cell boundaries find their triangle.
    const int i0 = std::max(cell_of(u_lo) - 1, 0), i1 = std::min(cell_of(u_hi) + 1, cells_ - 1);
    const int j0 = std::max(cell_of(v_lo) - 1, 0), j1 = std::min(cell_of(v_hi) + 1, cells_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * cells_ + i].push_back(static_cast<std::uint32_t>(t));
  }
}

std::optional<std::size_t> UvMap::locate(Vec2 uv) const {
  const int i = std::clamp(static_cast<int>(std::floor(uv.x * cells_)), 0, cells_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(uv.y * cells_)), 0, cells_ - 1);
  for (auto t : buckets_[static_cast<std::size_t>(j) * cells_ + i]) {
    if (uv_barycentric(mesh_, t, uv)) return t;
  }
  return std::nullopt;
}

std::optional<Vec3> UvMap::world(Vec2 uv) const {
  const auto tri = locate(uv);
  if (!tri) return std::nullopt;
  const auto w = *uv_barycentric(mesh_, *tri, uv);
  const auto& t = mesh_.triangles[*tri];
  return mesh_.vertices[t[0]] * w[0] + mesh_.vertices[t[1]] * w[1] + mesh_.vertices[t[2]] * w[2];
}

}  // namespace docsynth
