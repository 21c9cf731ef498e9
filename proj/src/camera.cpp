#include "docsynth/camera.hpp"

#include <cmath>

namespace docsynth {

SensorFrame sensor_frame(const CameraModel& camera) {
  const auto& b = camera.orientation;
  const double c = std::cos(camera.roll_theta);
  const double s = std::sin(camera.roll_theta);
  SensorFrame frame;
  frame.right = b.right * c - b.up * s;
  frame.up = b.right * s + b.up * c;
  frame.forward = b.forward;
  frame.focal_px = camera.focal_mm / camera.sensor_width_mm * camera.width;
  frame.cx = camera.width / 2.0;
  frame.cy = camera.height / 2.0;
  return frame;
}

namespace {

Vec3 film_direction(const SensorFrame& f, Vec2 film) {
  const double x = (film.x - f.cx) / f.focal_px;
  const double y = (film.y - f.cy) / f.focal_px;
  return f.forward + f.right * x - f.up * y;
}

}  // namespace

Ray pinhole_ray(const CameraModel& camera, Vec2 film) {
  const SensorFrame f = sensor_frame(camera);
  return {camera.position, normalize(film_direction(f, film))};
}

Vec2 concentric_disk(Vec2 u) {
  const double a = 2.0 * u.x - 1.0;
  const double b = 2.0 * u.y - 1.0;
  if (a == 0.0 && b == 0.0) return {0.0, 0.0};
  double r, phi;
  if (std::abs(a) > std::abs(b)) {
    r = a;
    phi = (kPi / 4.0) * (b / a);
  } else {
    r = b;
    phi = (kPi / 2.0) - (kPi / 4.0) * (a / b);
  }
  return {r * std::cos(phi), r * std::sin(phi)};
}

Ray camera_ray(const CameraModel& camera, Vec2 film, Vec2 lens_sample) {
  const SensorFrame f = sensor_frame(camera);
  const Vec3 dir = film_direction(f, film);
  if (!camera.f_number) return {camera.position, normalize(dir)};
  // Point on the plane of focus (perpendicular to forward); every lens
  // position sees it along its own ray.
  const Vec3 focus = camera.position + dir * camera.focus_distance_m;
  const double aperture_radius_m = 0.5 * (camera.focal_mm / *camera.f_number) * 1e-3;
  const Vec2 disk = concentric_disk(lens_sample);
  const Vec3 origin = camera.position + f.right * (disk.x * aperture_radius_m) + f.up * (disk.y * aperture_radius_m);
  return {origin, normalize(focus - origin)};
}

Ray camera_ray(const CameraModel& camera, int x, int y, StreamKey sample_key) {
  RngStream rng(sample_key);
  const double jx = rng.uniform();
  const double jy = rng.uniform();
  const double lx = rng.uniform();
  const double ly = rng.uniform();
  return camera_ray(camera, Vec2{x + jx, y + jy}, Vec2{lx, ly});
}

}  // namespace docsynth
