#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "docsynth/render.hpp"
#include "docsynth/scene.hpp"

namespace docsynth::testing {

/// Camera on +z looking down at the origin: right = +x, up = +y.
inline CameraModel fronto_camera(double distance, int width, int height, double roll = 0.0) {
  CameraModel c = look_at_camera({0, 0, distance}, {0, 0, 0}, width, height);
  c.roll_theta = roll;
  return c;
}

inline SheetSpec plain_sheet(double width_m, double height_m, int grid = 1) {
  SheetSpec s;
  s.width_m = width_m;
  s.height_m = height_m;
  s.grid_nx = s.grid_ny = grid;
  return s;
}

inline Material constant_material(double albedo) { return Material{nullptr, Rgb{albedo, albedo, albedo}, 1.0, false}; }

/// Scene with the sheet as mesh 0 plus optional extra meshes, all constant albedo.
inline PreparedScene simple_scene(const CameraModel& camera, const TriangleMesh& sheet, std::vector<TriangleMesh> extra,
                                  std::vector<LightSpec> lights, RenderSettings settings = {}, double albedo = 0.5,
                                  std::uint64_t seed = 1) {
  std::vector<TriangleMesh> meshes{sheet};
  for (auto& m : extra) meshes.push_back(std::move(m));
  std::vector<Material> materials(meshes.size(), constant_material(albedo));
  return prepare_scene(camera, settings, seed, std::move(meshes), std::move(materials), std::move(lights));
}

inline LightSpec environment(double radiance) { return {EnvironmentEmitter{Rgb{radiance, radiance, radiance}}, {}, {0, 0, -1}}; }
inline LightSpec point_light(const Vec3& p, double watts) { return {PointEmitter{watts}, p, {0, 0, -1}}; }

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("docsynth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path data_dir() { return std::filesystem::path(DOCSYNTH_TEST_DATA_DIR); }

}  // namespace docsynth::testing
