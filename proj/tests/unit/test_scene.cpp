#include <doctest.h>

#include <cmath>
#include <random>

#include "docsynth/errors.hpp"
#include "docsynth/scene.hpp"
#include "support/fixtures.hpp"

using namespace docsynth;
using docsynth::testing::plain_sheet;

namespace {

// Sum of edge lengths along each grid row (constant v), the polylines a bend
// about the y axis must preserve.
double row_polyline_length(const TriangleMesh& mesh, int nx, int ny) {
  double total = 0.0;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const auto a = static_cast<std::size_t>(j * (nx + 1) + i);
      total += length(mesh.vertices[a + 1] - mesh.vertices[a]);
    }
  return total;
}

}  // namespace

TEST_CASE("build_sheet_mesh 1x1 grid corners and uvs") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 1));
  REQUIRE(mesh.vertices.size() == 4);
  REQUIRE(mesh.triangles.size() == 2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(mesh.vertices[i].x) == doctest::Approx(0.1));
    CHECK(std::abs(mesh.vertices[i].y) == doctest::Approx(0.15));
    CHECK(mesh.vertices[i].z == 0.0);
    if (mesh.vertices[i].x > 0 && mesh.vertices[i].y > 0) CHECK(mesh.uvs[i] == Vec2{1, 1});
  }
}

TEST_CASE("build_sheet_mesh counts follow the closed forms for 1..256") {
  for (int n = 1; n <= 256; n += (n < 16 ? 1 : 17)) {
    const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, n));
    CHECK(mesh.vertices.size() == static_cast<std::size_t>((n + 1) * (n + 1)));
    CHECK(mesh.triangles.size() == static_cast<std::size_t>(2 * n * n));
  }
  const TriangleMesh m64 = build_sheet_mesh(plain_sheet(0.2, 0.3, 64));
  CHECK(m64.vertices.size() == 4225);
  CHECK(m64.triangles.size() == 8192);
}

TEST_CASE("uvs are affine in position and in [0,1]") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 7));
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK(mesh.uvs[i].x == doctest::Approx(mesh.vertices[i].x / 0.2 + 0.5));
    CHECK(mesh.uvs[i].y == doctest::Approx(mesh.vertices[i].y / 0.3 + 0.5));
  }
}

TEST_CASE("invalid sheets are rejected") {
  CHECK_THROWS_AS(build_sheet_mesh(plain_sheet(0.0, 0.3)), InvalidArgument);
  SheetSpec s = plain_sheet(0.2, 0.3);
  s.grid_nx = 0;
  CHECK_THROWS_AS(build_sheet_mesh(s), InvalidArgument);
  s = plain_sheet(0.2, 0.3);
  s.fields = {{"a", {0, 0, 0.5, 0.5}}, {"a", {0.5, 0.5, 1, 1}}};
  CHECK_THROWS_AS(build_sheet_mesh(s), InvalidArgument);
  s.fields = {{"a", {0.5, 0, 0.5, 0.5}}};
  CHECK_THROWS_AS(build_sheet_mesh(s), InvalidArgument);
}

TEST_CASE("empty deformation is the bit-exact identity on vertices") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 64));
  const TriangleMesh out = apply_deformation(mesh, {});
  CHECK(out.vertices == mesh.vertices);
}

TEST_CASE("zero curvature bend and zero amplitude roughness are identities") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 16));
  CHECK(apply_deformation(mesh, {{Bend{0.0, 0.7}}}).vertices == mesh.vertices);
  CHECK(apply_deformation(mesh, {{Roughness{0.0, 4.0, 9}}}).vertices == mesh.vertices);
}

TEST_CASE("bend closed form: R = 1, x = pi/2 maps to offsets (1, 1)") {
  TriangleMesh mesh;
  mesh.vertices = {{kPi / 2, 0, 0}, {0, 0, 0}, {0, 1, 0}};
  mesh.uvs = {{1, 0}, {0, 0}, {0, 1}};
  mesh.triangles = {{0, 1, 2}};
  const TriangleMesh out = apply_deformation(mesh, {{Bend{1.0, 0.0}}});
  CHECK(out.vertices[0].x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.vertices[0].z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.vertices[1] == Vec3{0, 0, 0});
}

TEST_CASE("bend preserves polyline length along the bend direction") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 64));
  const double before = row_polyline_length(mesh, 64, 64);
  for (const double curvature : {-1.0, -0.25, 0.5, 1.0}) {
    const TriangleMesh bent = apply_deformation(mesh, {{Bend{curvature, 0.0}}});
    CHECK(std::abs(row_polyline_length(bent, 64, 64) - before) / before < 1e-6);
  }
}

TEST_CASE("bent grid edges are exact chords of the preserved arc") {
  // Vertices land on the cylinder at their original arc length, so each edge
  // of step h becomes the chord 2R sin(h / 2R) for any curvature.
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 64));
  const double h = 0.2159 / 64;
  for (const double curvature : {-8.0, 3.0, 12.0}) {
    const double r = 1.0 / curvature;
    const double chord = std::abs(2.0 * r * std::sin(h / (2.0 * r)));
    const TriangleMesh bent = apply_deformation(mesh, {{Bend{curvature, 0.0}}});
    CHECK(row_polyline_length(bent, 64, 64) == doctest::Approx(chord * 64 * 65).epsilon(1e-9));
  }
}

TEST_CASE("bend about an oblique axis keeps points on the axis line fixed in plane") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.2, 8));
  const TriangleMesh bent = apply_deformation(mesh, {{Bend{5.0, 0.6}}});
  const double ax = std::cos(0.6), ay = std::sin(0.6);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 p = mesh.vertices[i];
    const Vec3 q = bent.vertices[i];
    // Perpendicular coordinate unchanged.
    CHECK((-ay * q.x + ax * q.y) == doctest::Approx(-ay * p.x + ax * p.y).epsilon(1e-12));
  }
}

TEST_CASE("fold leaves the unfolded side bit-identical and fixes the fold line") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 32));
  const Fold fold{{0.5, 0.5}, {0.0, 1.0}, kPi / 4};
  const TriangleMesh out = apply_deformation(mesh, {{fold}});
  int moved = 0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const double side = cross2(fold.direction, mesh.uvs[i] - fold.point);
    if (side <= 0.0) {
      CHECK(out.vertices[i] == mesh.vertices[i]);
    } else {
      ++moved;
      // Rigid rotation: distance to the fold line (x = 0) is preserved.
      CHECK(std::hypot(out.vertices[i].x, out.vertices[i].z) == doctest::Approx(std::abs(mesh.vertices[i].x)));
      CHECK(out.vertices[i].z > 0.0);  // positive dihedral lifts toward +z
    }
  }
  CHECK(moved == 16 * 33);
}

TEST_CASE("recomputed normals are unit length after every deformation") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 64));
  const Deformation d{{Bend{4.0, 0.3}, Fold{{0.3, 0.4}, {1.0, 0.2}, -0.8}, Roughness{0.001, 6.0, 42}}};
  const TriangleMesh out = apply_deformation(mesh, d);
  for (const Vec3& n : out.normals) CHECK(std::abs(length(n) - 1.0) < 1e-6);
}

TEST_CASE("invalid deformations are rejected") {
  const TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 4));
  CHECK_THROWS_AS(apply_deformation(mesh, {{Fold{{0.5, 0.5}, {0, 1}, kPi}}}), InvalidArgument);
  CHECK_THROWS_AS(apply_deformation(mesh, {{Roughness{-1e-3, 4, 0}}}), InvalidArgument);
  CHECK_THROWS_AS(apply_deformation(mesh, {{Bend{std::numeric_limits<double>::infinity(), 0}}}), InvalidArgument);
}

TEST_CASE("sheet_plane examples") {
  const TriangleMesh flat = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 16));
  const auto plane = sheet_plane(flat);
  REQUIRE(plane);
  CHECK(plane->normal.z == doctest::Approx(1.0));
  CHECK(std::abs(plane->origin.z) < 1e-12);
  CHECK(plane->width_m == doctest::Approx(0.2159));
  CHECK(plane->height_m == doctest::Approx(0.2794));
  const Vec3 corner = plane->world_from_uv(1.0, 1.0);
  CHECK(corner.x == doctest::Approx(0.2159 / 2));
  CHECK(corner.y == doctest::Approx(0.2794 / 2));

  CHECK_FALSE(sheet_plane(apply_deformation(flat, {{Fold{{0.5, 0.5}, {0, 1}, kPi / 4}}})));
  const auto rough0 = sheet_plane(apply_deformation(flat, {{Roughness{0.0, 4, 1}}}));
  REQUIRE(rough0);
  CHECK(rough0->normal.z == doctest::Approx(1.0));
}

TEST_CASE("sheet_plane follows a rigidly moved sheet") {
  TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 8));
  const double c = std::cos(0.4), s = std::sin(0.4);
  for (Vec3& v : mesh.vertices) v = Vec3{c * v.x - s * v.z, v.y, s * v.x + c * v.z + 0.05};
  const auto plane = sheet_plane(mesh);
  REQUIRE(plane);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 p = plane->world_from_uv(mesh.uvs[i].x, mesh.uvs[i].y);
    CHECK(length(p - mesh.vertices[i]) < 1e-9);
  }
}

TEST_CASE("UvMap interpolates positions barycentrically") {
  TriangleMesh mesh = build_sheet_mesh(plain_sheet(0.2, 0.3, 5));
  mesh = apply_deformation(mesh, {{Bend{6.0, 0.0}}});
  const UvMap map(mesh);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 uv{u(rng), u(rng)};
    const auto p = map.world(uv);
    REQUIRE(p);
    // Along the unbent y direction interpolation is exact.
    CHECK(p->y == doctest::Approx((uv.y - 0.5) * 0.3));
  }
  CHECK(map.world({0.0, 0.0}));
  CHECK(map.world({1.0, 1.0}));
  CHECK_FALSE(map.world({1.5, 0.5}));
}

TEST_CASE("camera validation") {
  CameraModel c = docsynth::testing::fronto_camera(1.0, 64, 64);
  CHECK_NOTHROW(validate(c));
  c.orientation.up = {0, 0, 0};
  CHECK_THROWS_AS(validate(c), GeometryError);
  c = docsynth::testing::fronto_camera(1.0, 64, 64);
  c.orientation.up = {0, 1.001, 0};
  CHECK_THROWS_AS(validate(c), GeometryError);
  c = docsynth::testing::fronto_camera(1.0, 64, 64);
  c.roll_theta = -kPi;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c.roll_theta = kPi;
  CHECK_NOTHROW(validate(c));
  c.f_number = 2.8;
  c.focus_distance_m = 0.0;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("sheet presets") {
  CHECK(sheet_preset("us-letter")->width_m == 0.2159);
  CHECK(sheet_preset("a4")->height_m == 0.297);
  CHECK_FALSE(sheet_preset("legal"));
}
