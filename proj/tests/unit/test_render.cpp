#include <doctest.h>

#include <cmath>

#include "docsynth/camera.hpp"
#include "docsynth/errors.hpp"
#include "docsynth/render.hpp"
#include "support/fixtures.hpp"

using namespace docsynth;
using namespace docsynth::testing;

namespace {

// sRGB OETF written out independently of the library.
int srgb_code(double linear) {
  const double c = std::min(1.0, std::max(0.0, linear));
  const double e = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
  return static_cast<int>(std::lround(255.0 * e));
}

double sheet_mean(const RenderPasses& p) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < p.seg.size(); ++i) {
    if (p.seg[i] != object_ids::kDocument) continue;
    sum += (p.rgb[3 * i] + p.rgb[3 * i + 1] + p.rgb[3 * i + 2]) / 3.0;
    ++n;
  }
  REQUIRE(n > 0);
  return sum / n;
}

}  // namespace

TEST_CASE("tonemap endpoints and midpoint") {
  CHECK(tonemap(0.0) == 0);
  CHECK(tonemap(1.0) == 255);
  CHECK(tonemap(0.5) == 188);
  CHECK(srgb_code(0.5) == 188);
  CHECK(tonemap(-3.0) == 0);
  CHECK(tonemap(7.0) == 255);
}

TEST_CASE("tonemap matches the sRGB transfer function over the unit range") {
  for (int i = 0; i <= 4096; ++i) {
    const double v = i / 4096.0;
    CHECK(static_cast<int>(tonemap(v)) == srgb_code(v));
  }
  const std::vector<float> img{0.0f, 0.25f, 1.0f, 0.5f};
  const auto out = tonemap(std::span<const float>(img));
  CHECK(out == std::vector<std::uint8_t>{0, static_cast<std::uint8_t>(srgb_code(0.25)), 255, 188});
}

TEST_CASE("white furnace: albedo 0.5 under unit sky renders 0.5") {
  RenderSettings settings;
  settings.spp = 256;
  settings.max_depth = 4;
  const auto scene = simple_scene(fronto_camera(0.5, 24, 24), build_sheet_mesh(plain_sheet(1.0, 1.0, 2)), {},
                                  {environment(1.0)}, settings, 0.5);
  const RenderPasses p = render(scene);
  CHECK(sheet_mean(p) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("white furnace holds for other albedos") {
  RenderSettings settings;
  settings.spp = 128;
  for (double albedo : {0.2, 0.8}) {
    const auto scene = simple_scene(fronto_camera(0.5, 16, 16), build_sheet_mesh(plain_sheet(1.0, 1.0, 2)), {},
                                    {environment(1.0)}, settings, albedo, 3);
    CHECK(sheet_mean(render(scene)) == doctest::Approx(albedo).epsilon(0.02));
  }
}

TEST_CASE("energy: no pixel exceeds the sky radiance in an environment-lit scene") {
  RenderSettings settings;
  settings.spp = 16;
  settings.max_depth = 6;
  const auto scene = simple_scene(fronto_camera(0.6, 32, 32), build_sheet_mesh(plain_sheet(0.5, 0.5, 4)),
                                  {make_box_mesh({0.05, 0.0, 0.05}, {0.1, 0.1, 0.1}, 0.3, object_ids::kOccluder)},
                                  {environment(1.0)}, settings, 1.0);
  const RenderPasses p = render(scene);
  for (float v : p.rgb) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f + 1e-6f);
  }
}

TEST_CASE("point light fully blocked by an occluder leaves shadowed sheet pixels at exactly zero") {
  RenderSettings settings;
  settings.spp = 8;
  settings.max_depth = 1;
  // Camera below a large opaque quad, light above it.
  const auto scene = simple_scene(fronto_camera(0.3, 32, 32), build_sheet_mesh(plain_sheet(1.0, 1.0, 2)),
                                  {make_quad_mesh({0, 0, 0.5}, {2, 0, 0}, {0, 2, 0}, object_ids::kOccluder)},
                                  {point_light({0, 0, 1.0}, 100.0)}, settings);
  const RenderPasses p = render(scene);
  int sheet_pixels = 0;
  for (std::size_t i = 0; i < p.seg.size(); ++i) {
    if (p.seg[i] != object_ids::kDocument) continue;
    ++sheet_pixels;
    CHECK(p.rgb[3 * i] == 0.0f);
    CHECK(p.rgb[3 * i + 1] == 0.0f);
    CHECK(p.rgb[3 * i + 2] == 0.0f);
  }
  CHECK(sheet_pixels == 32 * 32);
}

TEST_CASE("no shadow acne: an unoccluded flat sheet matches the analytic point-light radiance") {
  RenderSettings settings;
  settings.spp = 4;
  settings.max_depth = 1;
  const double watts = 50.0, albedo = 0.5;
  const Vec3 light{0.1, -0.05, 0.8};
  const auto camera = fronto_camera(1.0, 32, 32);
  const auto scene =
      simple_scene(camera, build_sheet_mesh(plain_sheet(1.0, 1.0, 8)), {}, {point_light(light, watts)}, settings, albedo);
  const RenderPasses p = render(scene);
  const SensorFrame f = sensor_frame(camera);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      // Radiance at the pixel center; jitter blurs it by well under 1%.
      const Vec3 q{(x + 0.5 - f.cx) / f.focal_px, (f.cy - y - 0.5) / f.focal_px, 0.0};
      const Vec3 d = light - q;
      const double r2 = dot(d, d);
      const double expected = albedo / kPi * watts / (4 * kPi) * (d.z / std::sqrt(r2)) / r2;
      CHECK(p.rgb[3 * (y * 32 + x)] == doctest::Approx(expected).epsilon(0.01));
    }
  }
}

TEST_CASE("depth pass equals the analytic ray-plane distance") {
  const auto camera = fronto_camera(1.0, 64, 48);
  RenderSettings settings;
  settings.spp = 1;
  const auto scene = simple_scene(camera, build_sheet_mesh(plain_sheet(2.0, 2.0, 4)), {}, {environment(1.0)}, settings);
  const RenderPasses p = render(scene);
  const double focal = 50.0 / 36.0 * 64;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      const double dx = (x + 0.5 - 32) / focal, dy = (y + 0.5 - 24) / focal;
      const double expected = std::sqrt(1.0 + dx * dx + dy * dy);  // 1 / cos(alpha)
      CHECK(std::abs(p.depth[y * 64 + x] - expected) < 1e-4);
    }
  }
}

TEST_CASE("misses get infinite depth and the miss label") {
  const auto scene = simple_scene(fronto_camera(1.0, 16, 16), build_sheet_mesh(plain_sheet(0.05, 0.05)), {},
                                  {environment(0.7)}, RenderSettings{1, 2, 8});
  const RenderPasses p = render(scene);
  CHECK(std::isinf(p.depth[0]));
  CHECK(p.seg[0] == object_ids::kMiss);
  CHECK(p.rgb[0] == doctest::Approx(0.7));
  CHECK(p.seg[8 * 16 + 8] == object_ids::kDocument);
}

TEST_CASE("renders are bit-identical across 1, 4 and 8 threads") {
  RenderSettings settings;
  settings.spp = 4;
  settings.tile = 8;
  auto camera = fronto_camera(0.7, 40, 36, 0.2);
  camera.f_number = 2.8;
  camera.focus_distance_m = 0.7;
  const auto sheet = apply_deformation(build_sheet_mesh(plain_sheet(0.3, 0.4, 8)), {{Bend{3.0, 0.2}}});
  const auto scene = simple_scene(camera, sheet, {make_box_mesh({0.1, 0.1, 0.05}, {0.05, 0.05, 0.1}, 0.0, 2)},
                                  {environment(0.3), point_light({0.2, 0.3, 1.0}, 40)}, settings);
  const RenderPasses one = render(scene, 1);
  CHECK(render(scene, 4) == one);
  CHECK(render(scene, 8) == one);
}

TEST_CASE("seg pass equals brute-force re-traced primary hits") {
  RenderSettings settings;
  settings.spp = 1;
  settings.tile = 8;
  const auto sheet = apply_deformation(build_sheet_mesh(plain_sheet(0.2, 0.28, 8)), {{Fold{{0.5, 0.5}, {1, 0.3}, 0.8}}});
  const auto scene = simple_scene(fronto_camera(0.6, 48, 48), sheet,
                                  {make_quad_mesh({0, 0, -0.01}, {0.5, 0, 0}, {0, 0.5, 0}, object_ids::kBackground),
                                   make_quad_mesh({0.1, 0.05, -0.005}, {0.1, 0, 0}, {0, 0.14, 0}, object_ids::kExtraSheet),
                                   make_box_mesh({-0.05, 0.05, 0.05}, {0.04, 0.03, 0.1}, 0.5, object_ids::kOccluder)},
                                  {environment(1.0)}, settings);
  const RenderPasses p = render(scene);
  const Geometry& g = *scene.geometry;
  int labels[256] = {};
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      const Ray ray = aov_ray(scene.camera, x, y);
      double best = kInfinity;
      std::uint8_t id = object_ids::kMiss;
      for (std::size_t i = 0; i < g.triangle_count(); ++i) {
        double t, b1, b2;
        if (intersect_triangle(g.triangle(i), ray, kRayEpsilon, best, t, b1, b2) && t < best) {
          best = t;
          id = g.resolve(static_cast<std::uint32_t>(i), ray, t, b1, b2).object_id;
        }
      }
      CHECK(p.seg[y * 48 + x] == id);
      ++labels[id];
    }
  }
  for (int id : {0, 1, 2, 3}) CHECK(labels[id] > 0);
}

TEST_CASE("degenerate camera is rejected before tracing") {
  auto scene = simple_scene(fronto_camera(1.0, 8, 8), build_sheet_mesh(plain_sheet(1, 1)), {}, {environment(1)});
  scene.camera.orientation.forward = {0, 0, 0};
  CHECK_THROWS_AS(render(scene), GeometryError);
}
