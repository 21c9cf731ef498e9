#include "docsynth/render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "docsynth/camera.hpp"
#include "docsynth/errors.hpp"

namespace docsynth {

Rgb Material::albedo(Vec2 uv) const {
  Rgb a = tint;
  if (texture) {
    const double px = uv.x * uv_scale * texture->width();
    const double py = (1.0 - uv.y) * uv_scale * texture->height();
    a = hadamard(texture->sample_bilinear(px, py, wrap), tint);
  }
  return {std::clamp(a.x, 0.0, 1.0), std::clamp(a.y, 0.0, 1.0), std::clamp(a.z, 0.0, 1.0)};
}

TriangleMesh make_quad_mesh(const Vec3& center, const Vec3& half_u, const Vec3& half_v, std::uint8_t object_id) {
  TriangleMesh mesh;
  mesh.object_id = object_id;
  mesh.vertices = {center - half_u - half_v, center + half_u - half_v, center + half_u + half_v, center - half_u + half_v};
  mesh.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
  recompute_normals(mesh);
  return mesh;
}

TriangleMesh make_box_mesh(const Vec3& center, const Vec3& size, double yaw, std::uint8_t object_id) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 ex = Vec3{c, s, 0} * (size.x / 2);
  const Vec3 ey = Vec3{-s, c, 0} * (size.y / 2);
  const Vec3 ez = Vec3{0, 0, 1} * (size.z / 2);
  TriangleMesh mesh;
  mesh.object_id = object_id;
  // One quad per face, outward winding.
  const auto face = [&mesh](const Vec3& o, const Vec3& hu, const Vec3& hv) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (const Vec3& p : {o - hu - hv, o + hu - hv, o + hu + hv, o - hu + hv}) mesh.vertices.push_back(p);
    for (const Vec2 uv : {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}}) mesh.uvs.push_back(uv);
    mesh.triangles.push_back({base, base + 1, base + 2});
    mesh.triangles.push_back({base, base + 2, base + 3});
  };
  face(center + ez, ex, ey);
  face(center - ez, ey, ex);
  face(center + ex, ey, ez);
  face(center - ex, ez, ey);
  face(center + ey, ez, ex);
  face(center - ey, ex, ez);
  recompute_normals(mesh);
  return mesh;
}

ImageBuffer document_texture(const SceneInstance& scene, TextureCache& textures) {
  ImageBuffer tex = *textures.get(scene.sheet.texture);
  const StreamKey key = StreamKey{scene.seed}.derive("style");
  if (scene.patch) {
    const auto patch = textures.get(scene.patch->texture);
    tex = stamp_patch(tex, *patch, scene.patch->rect, scene.patch->field_name).first;
  }
  if (scene.style.sigma > 0.0) tex = gaussian_noise(tex, scene.style.sigma, key.derive("gaussian"));
  if (scene.style.morph) tex = morphology(tex, *scene.style.morph, scene.style.morph_radius);
  return tex;
}

PreparedScene prepare_scene(const CameraModel& camera, const RenderSettings& settings, std::uint64_t seed,
                            std::vector<TriangleMesh> meshes, std::vector<Material> materials,
                            std::vector<LightSpec> lights) {
  validate(camera);
  validate(settings);
  if (meshes.size() != materials.size()) throw InvalidArgument("one material per mesh required");
  PreparedScene prepared;
  prepared.camera = camera;
  prepared.settings = settings;
  prepared.seed = seed;
  if (!meshes.empty()) prepared.sheet_mesh = meshes.front();
  prepared.geometry = std::make_shared<const Geometry>(std::move(meshes));
  prepared.materials = std::move(materials);
  prepared.lights = std::move(lights);
  return prepared;
}

PreparedScene prepare_scene(const SceneInstance& scene, TextureCache& textures) {
  validate(scene);
  std::vector<TriangleMesh> meshes;
  std::vector<Material> materials;

  auto doc = std::make_shared<const ImageBuffer>(document_texture(scene, textures));
  TriangleMesh sheet = apply_deformation(build_sheet_mesh(scene.sheet), scene.deformation);
  // The deformed sheet rests on the table: its lowest vertex sits at z = 0.
  if (!sheet.vertices.empty()) {
    double low = kInfinity;
    for (const Vec3& v : sheet.vertices) low = std::min(low, v.z);
    if (low != 0.0)
      for (Vec3& v : sheet.vertices) v.z -= low;
  }
  meshes.push_back(std::move(sheet));
  materials.push_back({doc, {1, 1, 1}, 1.0, false});

  const auto& bg = scene.background;
  const double half = bg.table_extent_m / 2;
  meshes.push_back(make_quad_mesh({0, 0, bg.table_z}, {half, 0, 0}, {0, half, 0}, object_ids::kBackground));
  // A handful of variants per built-in surface keeps the cache bounded.
  materials.push_back({textures.get(bg.surface, scene.seed & 3u), {1, 1, 1}, bg.table_extent_m / bg.texture_tile_m, true});

  for (const auto& extra : bg.extra_sheets) {
    const double c = std::cos(extra.rotation), s = std::sin(extra.rotation);
    const Vec3 hu = Vec3{c, s, 0} * (scene.sheet.width_m / 2);
    const Vec3 hv = Vec3{-s, c, 0} * (scene.sheet.height_m / 2);
    meshes.push_back(make_quad_mesh({extra.offset.x, extra.offset.y, extra.z}, hu, hv, object_ids::kExtraSheet));
    materials.push_back({doc, {0.95, 0.95, 0.95}, 1.0, false});
  }
  for (const auto& occ : bg.occluders) {
    if (occ.shape == OccluderShape::kQuad) {
      const double c = std::cos(occ.yaw), s = std::sin(occ.yaw);
      meshes.push_back(make_quad_mesh(occ.center, Vec3{c, s, 0} * (occ.size.x / 2), Vec3{-s, c, 0} * (occ.size.y / 2),
                                      object_ids::kOccluder));
    } else {
      meshes.push_back(make_box_mesh(occ.center, occ.size, occ.yaw, object_ids::kOccluder));
    }
    materials.push_back({nullptr, occ.albedo, 1.0, false});
  }
  CameraModel camera = scene.camera;
  return prepare_scene(camera, scene.render, scene.seed, std::move(meshes), std::move(materials), scene.lights);
}

Ray aov_ray(const CameraModel& camera, int x, int y) { return pinhole_ray(camera, Vec2{x + 0.5, y + 0.5}); }

namespace {

struct Onb {
  Vec3 t, b, n;
  explicit Onb(const Vec3& normal) : n(normal) {
    // Duff et al. branchless basis.
    const double sign = std::copysign(1.0, n.z);
    const double a = -1.0 / (sign + n.z);
    const double bb = n.x * n.y * a;
    t = {1.0 + sign * n.x * n.x * a, sign * bb, -sign * n.x};
    b = {bb, sign + n.y * n.y * a, -n.y};
  }
  Vec3 to_world(const Vec3& v) const { return t * v.x + b * v.y + n * v.z; }
};

Vec3 cosine_hemisphere(const Onb& frame, double u1, double u2) {
  const Vec2 d = concentric_disk({u1, u2});
  const double z = std::sqrt(std::max(0.0, 1.0 - d.x * d.x - d.y * d.y));
  return normalize(frame.to_world({d.x, d.y, z}));
}

// Direct light from point and area emitters at a diffuse vertex.
Rgb next_event(const PreparedScene& scene, const Vec3& p, const Vec3& n, const Rgb& albedo, RngStream& rng) {
  Rgb sum;
  for (const auto& light : scene.lights) {
    if (const auto* point = std::get_if<PointEmitter>(&light.kind)) {
      const Vec3 to_light = light.position - p;
      const double dist = length(to_light);
      if (dist <= 2 * kRayEpsilon) continue;
      const Vec3 wi = to_light / dist;
      const double cos_s = dot(n, wi);
      if (cos_s <= 0.0) continue;
      if (scene.geometry->occluded({p, wi}, kRayEpsilon, dist - kRayEpsilon)) continue;
      const double intensity = point->intensity_w / (4.0 * kPi);
      sum += albedo * (intensity * cos_s / (dist * dist) / kPi);
    } else if (const auto* area = std::get_if<AreaEmitter>(&light.kind)) {
      const Onb frame(light.normal);
      const double u = rng.uniform() - 0.5;
      const double v = rng.uniform() - 0.5;
      const Vec3 q = light.position + frame.t * (u * area->width_m) + frame.b * (v * area->height_m);
      const Vec3 to_light = q - p;
      const double dist = length(to_light);
      if (dist <= 2 * kRayEpsilon) continue;
      const Vec3 wi = to_light / dist;
      const double cos_s = dot(n, wi);
      const double cos_l = -dot(light.normal, wi);
      if (cos_s <= 0.0 || cos_l <= 0.0) continue;
      if (scene.geometry->occluded({p, wi}, kRayEpsilon, dist - kRayEpsilon)) continue;
      const double geom = cos_s * cos_l / (dist * dist) * area->width_m * area->height_m;
      sum += hadamard(albedo, area->radiance) * (geom / kPi);
    }
  }
  return sum;
}

Rgb environment_radiance(const PreparedScene& scene) {
  Rgb env;
  for (const auto& light : scene.lights)
    if (const auto* e = std::get_if<EnvironmentEmitter>(&light.kind)) env += e->radiance;
  return env;
}

}  // namespace

Rgb trace_sample(const PreparedScene& scene, int x, int y, int sample) {
  const auto pixel = static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(scene.camera.width) + x;
  const StreamKey key = StreamKey{scene.seed}.derive(pixel).derive(static_cast<std::uint64_t>(sample));
  Ray ray = camera_ray(scene.camera, x, y, key.derive("camera"));
  RngStream rng(key.derive("path"));
  const Rgb env = environment_radiance(scene);

  auto hit = scene.geometry->intersect(ray);
  if (!hit) return env;
  Rgb radiance;
  Rgb throughput{1, 1, 1};
  for (int depth = 1;; ++depth) {
    Vec3 n = hit->normal;
    if (dot(n, ray.direction) > 0.0) n = -n;
    const Rgb albedo = scene.materials[hit->mesh].albedo(hit->uv);
    radiance += hadamard(throughput, next_event(scene, hit->point, n, albedo, rng));
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    ray = Ray{hit->point, cosine_hemisphere(Onb(n), u1, u2)};
    // Cosine-weighted sampling: f * cos / pdf == albedo.
    throughput = hadamard(throughput, albedo);
    hit = scene.geometry->intersect(ray);
    if (!hit) {
      radiance += hadamard(throughput, env);
      break;
    }
    if (depth >= scene.settings.max_depth) break;
  }
  return radiance;
}

RenderPasses render(const PreparedScene& scene, int threads) {
  validate(scene.camera);
  validate(scene.settings);
  const int width = scene.camera.width;
  const int height = scene.camera.height;
  RenderPasses passes;
  passes.width = width;
  passes.height = height;
  const auto pixels = static_cast<std::size_t>(width) * height;
  passes.rgb.assign(pixels * 3, 0.0f);
  passes.depth.assign(pixels, std::numeric_limits<float>::infinity());
  passes.seg.assign(pixels, object_ids::kMiss);

  const int tile = scene.settings.tile;
  const int tiles_x = (width + tile - 1) / tile;
  const int tiles_y = (height + tile - 1) / tile;
  const int tile_count = tiles_x * tiles_y;
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int t = next++; t < tile_count; t = next++) {
      const int x0 = (t % tiles_x) * tile;
      const int y0 = (t / tiles_x) * tile;
      for (int y = y0; y < std::min(y0 + tile, height); ++y) {
        for (int x = x0; x < std::min(x0 + tile, width); ++x) {
          const std::size_t idx = static_cast<std::size_t>(y) * width + x;
          if (const auto hit = scene.geometry->intersect(aov_ray(scene.camera, x, y))) {
            passes.depth[idx] = static_cast<float>(hit->t);
            passes.seg[idx] = hit->object_id;
          }
          Rgb sum;
          for (int s = 0; s < scene.settings.spp; ++s) sum += trace_sample(scene, x, y, s);
          const Rgb mean = sum / scene.settings.spp;
          passes.rgb[idx * 3 + 0] = static_cast<float>(mean.x);
          passes.rgb[idx * 3 + 1] = static_cast<float>(mean.y);
          passes.rgb[idx * 3 + 2] = static_cast<float>(mean.z);
        }
      }
    }
  };
  const int workers = std::clamp(threads, 1, std::max(1, tile_count));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  return passes;
}

std::uint8_t tonemap(double linear) { return encode_srgb8(linear); }

std::vector<std::uint8_t> tonemap(std::span<const float> rgb) {
  std::vector<std::uint8_t> out(rgb.size());
  std::transform(rgb.begin(), rgb.end(), out.begin(), [](float v) { return encode_srgb8(v); });
  return out;
}

}  // namespace docsynth
