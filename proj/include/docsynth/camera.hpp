#pragma once

#include "docsynth/geometry.hpp"
#include "docsynth/rng.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

/// Rolled sensor axes plus intrinsics in pixels. Film coordinates are
/// continuous pixels with x to the right and y down; pixel (i, j) covers
/// [i, i+1) x [j, j+1) and the principal point is (W/2, H/2).
struct SensorFrame {
  Vec3 right;
  Vec3 up;
  Vec3 forward;
  double focal_px = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

SensorFrame sensor_frame(const CameraModel& camera);

/// Pinhole ray from the camera position through a film point.
Ray pinhole_ray(const CameraModel& camera, Vec2 film);

/// Camera ray through `film`. For a thin lens, `lens_sample` in [0,1)^2 picks
/// the point on the aperture disk; pinhole cameras ignore it.
Ray camera_ray(const CameraModel& camera, Vec2 film, Vec2 lens_sample);

/// Jittered ray for pixel (x, y); all randomness comes from `sample_key`.
Ray camera_ray(const CameraModel& camera, int x, int y, StreamKey sample_key);

/// Shirley-Chiu concentric map from [0,1)^2 to the unit disk.
Vec2 concentric_disk(Vec2 u);

}  // namespace docsynth
