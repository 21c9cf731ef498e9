#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "docsynth/bvh.hpp"
#include "docsynth/image.hpp"
#include "docsynth/scene.hpp"
#include "docsynth/textures.hpp"

namespace docsynth {

/// Lambertian material; albedo = texture(uv * uv_scale) * tint, or tint alone.
struct Material {
  std::shared_ptr<const ImageBuffer> texture;
  Rgb tint{1, 1, 1};
  double uv_scale = 1.0;
  bool wrap = false;

  Rgb albedo(Vec2 uv) const;
};

/// Everything the tracer needs, with meshes built, deformed and indexed.
struct PreparedScene {
  CameraModel camera;
  RenderSettings settings;
  std::uint64_t seed = 0;
  std::shared_ptr<const Geometry> geometry;
  std::vector<Material> materials;  // one per mesh
  std::vector<LightSpec> lights;
  TriangleMesh sheet_mesh;  // deformed document sheet, also mesh 0 of geometry
};

/// Builds scene meshes (sheet, table, extra sheets, occluders), resolves
/// textures and applies style noise and content patches to the document.
PreparedScene prepare_scene(const SceneInstance& scene, TextureCache& textures);

/// Same as prepare_scene but with caller-provided geometry and materials.
PreparedScene prepare_scene(const CameraModel& camera, const RenderSettings& settings, std::uint64_t seed,
                            std::vector<TriangleMesh> meshes, std::vector<Material> materials,
                            std::vector<LightSpec> lights);

/// Document texture after style noise, morphology and patch compositing.
ImageBuffer document_texture(const SceneInstance& scene, TextureCache& textures);

TriangleMesh make_quad_mesh(const Vec3& center, const Vec3& half_u, const Vec3& half_v, std::uint8_t object_id);
TriangleMesh make_box_mesh(const Vec3& center, const Vec3& size, double yaw, std::uint8_t object_id);

struct RenderPasses {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;           // linear, width * height * 3
  std::vector<float> depth;         // meters along the primary ray, +inf on miss
  std::vector<std::uint8_t> seg;    // object_ids

  bool operator==(const RenderPasses&) const = default;
};

/// Tile-parallel path tracing. Per-sample randomness is keyed by
/// (seed, pixel, sample), so the output is identical for any thread count.
RenderPasses render(const PreparedScene& scene, int threads = 1);

/// Radiance estimate for one sample of pixel (x, y).
Rgb trace_sample(const PreparedScene& scene, int x, int y, int sample);

/// Primary-hit AOV ray: pinhole ray through the pixel center.
Ray aov_ray(const CameraModel& camera, int x, int y);

std::uint8_t tonemap(double linear);
std::vector<std::uint8_t> tonemap(std::span<const float> rgb);

}  // namespace docsynth
