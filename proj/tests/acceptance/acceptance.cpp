// Acceptance runner. Each criterion prints one PASS/FAIL line with the
// measured values; `--criterion N` (repeatable) restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "docsynth/bvh.hpp"
#include "docsynth/dataset.hpp"
#include "docsynth/groundtruth.hpp"
#include "docsynth/image.hpp"
#include "docsynth/pipeline.hpp"
#include "docsynth/render.hpp"
#include "docsynth/rng.hpp"
#include "docsynth/sampler.hpp"
#include "docsynth/textures.hpp"
#include "support/fixtures.hpp"

using namespace docsynth;
using namespace docsynth::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
  return files;
}

double angle_diff(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" DOCSYNTH_CLI_PATH "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string generate_args(const fs::path& out, int count, const std::string& res, int spp, int threads) {
  return "generate --spec \"" + (data_dir() / "example_spec.json").string() + "\" --output \"" + out.string() +
         "\" --count " + std::to_string(count) + " --res " + res + " --spp " + std::to_string(spp) +
         " --threads " + std::to_string(threads);
}

// ---------------------------------------------------------------------------

Outcome white_furnace() {
  RenderSettings settings;
  settings.spp = 256;
  settings.max_depth = 4;
  const auto scene = simple_scene(fronto_camera(0.5, 128, 128), build_sheet_mesh(plain_sheet(1.0, 1.0, 2)), {},
                                  {environment(1.0)}, settings, 0.5);
  const auto start = Clock::now();
  const RenderPasses p = render(scene, 1);
  const double secs = seconds_since(start);
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < p.seg.size(); ++i) {
    if (p.seg[i] != object_ids::kDocument) continue;
    sum += (p.rgb[3 * i] + p.rgb[3 * i + 1] + p.rgb[3 * i + 2]) / 3.0;
    ++n;
  }
  const double mean = n ? sum / n : 0.0;
  const double rel = std::abs(mean - 0.5) / 0.5;
  return {n > 0 && rel <= 0.02 && secs < 60.0,
          fmt("mean %.5f over %ld sheet pixels (rel err %.4f, limit 0.02), %.2f s (limit 60 s)", mean, n, rel, secs)};
}

Outcome projection_consistency() {
  // The example ranges with every deformation pinned to zero.
  std::string text = slurp(data_dir() / "example_spec.json");
  for (const std::string key : {"deform.bend_curvature", "deform.fold_dihedral", "deform.roughness_amplitude_m"}) {
    const auto at = text.find("\"" + key + "\"");
    const auto end = text.find('}', at);
    text.replace(at, end - at + 1, "\"" + key + "\": {\"min\": 0, \"max\": 0}");
  }
  const RandomizationSpec spec = parse_spec(text);
  TextureCache textures(data_dir() / "docs");
  const auto docs = discover_documents(data_dir() / "docs", textures);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.45);

  double worst = 0.0;
  long compared = 0;
  int planar = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    SceneInstance scene = sample_scene(spec, docs[choose_document(spec.seed, i, docs.size())], i);
    scene.sheet.grid_nx = scene.sheet.grid_ny = 8;
    const double a = u(rng), b = u(rng);
    scene.sheet.fields.push_back({"random", {a, b, a + u(rng), b + u(rng)}});
    const PreparedScene prepared = prepare_scene(scene, textures);
    const auto plane = sheet_plane(prepared.sheet_mesh);
    if (!plane) continue;
    ++planar;
    const Homography h = homography_doc_to_image(scene.camera, plane);
    const UvMap map(prepared.sheet_mesh);
    for (const auto& field : scene.sheet.fields) {
      const ProjectedField f = project_field(scene.camera, map, field, prepared);
      const auto uv = field_boundary_uv(field.uv_rect);
      if (f.polygon.size() != uv.size()) continue;
      // Corners sit at every sixteenth boundary sample; the rest are checked too.
      for (std::size_t k = 0; k < uv.size(); ++k) {
        const Vec2 q = h.apply({(uv[k].x - 0.5) * plane->width_m, (uv[k].y - 0.5) * plane->height_m});
        worst = std::max(worst, std::hypot(q.x - f.polygon[k].x, q.y - f.polygon[k].y));
        ++compared;
      }
    }
  }
  return {planar == 1000 && compared > 0 && worst < 0.5,
          fmt("%d/1000 planar scenes, %ld boundary points, max error %.3e px (limit 0.5)", planar, compared, worst)};
}

Outcome depth_correctness() {
  const int w = 256, h = 192;
  RenderSettings settings;
  settings.spp = 1;
  const auto scene = simple_scene(fronto_camera(1.0, w, h), build_sheet_mesh(plain_sheet(0.6, 0.5, 4)), {},
                                  {environment(1.0)}, settings);
  const RenderPasses p = render(scene, 1);
  const double focal = 50.0 / 36.0 * w;
  double worst = 0.0;
  long n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (p.seg[y * w + x] != object_ids::kDocument) continue;
      const double dx = (x + 0.5 - w / 2.0) / focal, dy = (y + 0.5 - h / 2.0) / focal;
      worst = std::max(worst, std::abs(p.depth[y * w + x] - std::sqrt(1.0 + dx * dx + dy * dy)));
      ++n;
    }
  }
  return {n > 0 && worst < 1e-4, fmt("%ld sheet pixels, max |depth - analytic| %.3e m (limit 1e-4)", n, worst)};
}

Outcome determinism() {
  const auto dir = fresh_dir("acceptance_determinism");
  const auto start = Clock::now();
  const int a = run_cli(generate_args(dir / "t1", 20, "256x256", 32, 1), dir / "t1.log");
  const int b = run_cli(generate_args(dir / "t8", 20, "256x256", 32, 8), dir / "t8.log");
  const double secs = seconds_since(start);
  if (a != 0 || b != 0) return {false, fmt("CLI exit codes %d and %d", a, b)};
  const auto ta = tree(dir / "t1");
  const auto tb = tree(dir / "t8");
  std::size_t differing = 0;
  for (const auto& [path, bytes] : ta) {
    const auto it = tb.find(path);
    if (it == tb.end() || it->second != bytes) ++differing;
  }
  differing += tb.size() > ta.size() ? tb.size() - ta.size() : 0;
  const bool ok = differing == 0 && ta.size() == 1 + 3 * 20 && secs < 600.0;
  return {ok, fmt("%zu files, %zu differing, both runs %.1f s (limit 600 s)", ta.size(), differing, secs)};
}

Outcome periodic_loss_closed_form() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4 * kPi, 4 * kPi);
  double worst = 0.0, worst_self = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double pred = u(rng), theta = u(rng);
    const double expected = 2.0 - 2.0 * std::cos(pred - theta);
    worst = std::max(worst, std::abs(periodic_loss(std::sin(pred), std::cos(pred), theta) - expected));
    const auto [s, c] = encode_angle(theta);
    worst_self = std::max(worst_self, std::abs(periodic_loss(s, c, theta)));
  }
  return {worst < 1e-12 && worst_self < 1e-15,
          fmt("max closed-form error %.3e (limit 1e-12), max loss(encode(t), t) %.3e (limit 1e-15)", worst, worst_self)};
}

Outcome rotation_labels() {
  const TriangleMesh sheet = build_sheet_mesh(plain_sheet(0.2159, 0.2794, 4));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  double worst_label = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double roll = u(rng);
    const AngleLabel label = rotation_label(fronto_camera(0.5 + 0.01 * i, 320, 240, roll), sheet);
    worst_label = std::max(worst_label, angle_diff(label.theta, roll));
  }
  double worst_trip = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double theta = u(rng);
    if (theta == -kPi) theta = kPi;
    const auto [s, c] = encode_angle(theta);
    worst_trip = std::max(worst_trip, std::abs(decode_angle(s, c) - theta));
  }
  return {worst_label < 1e-6 && worst_trip < 1e-12,
          fmt("max label error %.3e rad (limit 1e-6), max decode(encode) error %.3e (limit 1e-12)", worst_label,
              worst_trip)};
}

Outcome sampler_statistics() {
  const CategoricalDist dist{{{"a", 1.0}, {"b", 3.0}}};
  const int n = 100000;
  int b = 0;
  for (int i = 0; i < n; ++i) b += sample_categorical(dist, parameter_key(11, i, "test.choice")) == "b";
  const double freq = static_cast<double>(b) / n;
  const double sigma = std::sqrt(0.75 * 0.25 / n);
  const double z = std::abs(freq - 0.75) / sigma;

  const RandomizationSpec spec = parse_spec(slurp(data_dir() / "example_spec.json"));
  long draws = 0, violations = 0;
  for (const auto& [path, entry] : spec.params) {
    const auto* range = std::get_if<ParamRange>(&entry);
    if (!range) continue;
    for (int i = 0; i < n; ++i) {
      const double v = sample_continuous(*range, parameter_key(spec.seed, i, path));
      violations += !(v >= range->min && v <= range->max);
      ++draws;
    }
  }
  return {z <= 3.0 && violations == 0 && draws > 0,
          fmt("b frequency %.5f (%.2f sigma, limit 3), %ld continuous draws, %ld out of range", freq, z, draws,
              violations)};
}

Outcome bvh_oracle() {
  const TriangleMesh sheet = apply_deformation(build_sheet_mesh(plain_sheet(0.2159, 0.2794, 64)),
                                               {{Bend{4.0, 0.3}, Fold{{0.45, 0.5}, {1, 0.6}, 0.7}, Roughness{0.001, 6, 9}}});
  const Geometry g({sheet});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0, hits = 0;
  for (int i = 0; i < 10000; ++i) {
    Ray ray{{0.15 * u(rng), 0.2 * u(rng), 0.3 + 0.2 * u(rng)},
            normalize(Vec3{0.4 * u(rng), 0.4 * u(rng), -1.0 + 0.2 * u(rng)})};
    if (i % 5 == 0) ray = {{0.2 * u(rng), 0.2 * u(rng), 0.05 * u(rng)}, normalize(Vec3{u(rng), u(rng), u(rng)})};
    double best = kInfinity;
    std::size_t best_i = 0;
    bool found = false;
    for (std::size_t k = 0; k < g.triangle_count(); ++k) {
      double t, b1, b2;
      if (intersect_triangle(g.triangle(k), ray, kRayEpsilon, best, t, b1, b2) && (!found || t < best)) {
        best = t;
        best_i = k;
        found = true;
      }
    }
    const auto hit = g.intersect(ray);
    hits += found;
    if (hit.has_value() != found || (hit && (hit->t != best || hit->primitive != best_i))) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu triangles, 10000 rays (%d hits), %d mismatches", g.triangle_count(), hits, mismatches)};
}

Outcome segmentation_oracle() {
  RenderSettings settings;
  settings.spp = 2;
  const auto sheet = apply_deformation(build_sheet_mesh(plain_sheet(0.2159, 0.2794, 16)), {{Bend{3.0, 0.5}}});
  const auto scene = simple_scene(
      fronto_camera(0.55, 256, 256, 0.3), sheet,
      {make_quad_mesh({0, 0, -0.01}, {0.6, 0, 0}, {0, 0.6, 0}, object_ids::kBackground),
       make_quad_mesh({0.12, 0.08, -0.005}, {0.1, 0.02, 0}, {-0.02, 0.14, 0}, object_ids::kExtraSheet),
       make_quad_mesh({-0.15, -0.1, -0.006}, {0.1, 0, 0}, {0, 0.14, 0}, object_ids::kExtraSheet),
       make_box_mesh({-0.05, 0.06, 0.04}, {0.05, 0.03, 0.08}, 0.5, object_ids::kOccluder),
       make_box_mesh({0.07, -0.09, 0.02}, {0.03, 0.03, 0.04}, -0.2, object_ids::kOccluder)},
      {environment(0.5), point_light({0.2, 0.3, 1.0}, 30)}, settings);
  const RenderPasses p = render(scene, 1);
  const Geometry& g = *scene.geometry;
  long mismatches = 0;
  std::set<int> seen;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
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
      mismatches += p.seg[y * 256 + x] != id;
      seen.insert(id);
    }
  }
  const bool all_classes = seen.count(0) && seen.count(1) && seen.count(2) && seen.count(3);
  return {mismatches == 0 && all_classes,
          fmt("65536 pixels, %ld mismatches, %zu distinct ids present", mismatches, seen.size())};
}

Outcome noise_properties() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  long order_violations = 0;
  for (int k = 0; k < 100; ++k) {
    ImageBuffer img(16 + k % 17, 12 + k % 13, 1 + k % 4);
    for (float& v : img.data()) v = u(rng);
    const int r = 1 + k % 3;
    const ImageBuffer lo = morphology(img, MorphOp::kErode, r);
    const ImageBuffer hi = morphology(img, MorphOp::kDilate, r);
    for (std::size_t i = 0; i < img.data().size(); ++i)
      order_violations += !(lo.data()[i] <= img.data()[i] && img.data()[i] <= hi.data()[i]);
  }

  const double sigma = 0.1;
  const ImageBuffer flat(1000, 1000, 1, 0.5f);
  const ImageBuffer noisy = gaussian_noise(flat, sigma, master_key(42).derive("noise"));
  double sum = 0.0;
  for (float v : noisy.data()) sum += v;
  const double n = 1e6;
  const double offset = std::abs(sum / n - 0.5);
  const double bound = 3.0 * sigma / std::sqrt(n);

  ImageBuffer random(37, 23, 3);
  for (float& v : random.data()) v = u(rng);
  const bool identity = gaussian_noise(random, 0.0, master_key(3)) == random;
  return {order_violations == 0 && offset < bound && identity,
          fmt("%ld ordering violations, |mean - 0.5| %.2e (bound %.2e), sigma 0 identity %s", order_violations, offset,
              bound, identity ? "yes" : "no")};
}

Outcome end_to_end() {
  const auto dir = fresh_dir("acceptance_end_to_end");
  const fs::path out = dir / "out";
  const auto start = Clock::now();
  const int code = run_cli(generate_args(out, 100, "512x512", 64, 8), dir / "run.log");
  const double secs = seconds_since(start);
  if (code != 0) return {false, fmt("CLI exit code %d after %.0f s", code, secs)};
  const DatasetManifest m = read_manifest(out / "manifest.jsonl");
  long missing = 0, outside = 0, polygons = 0;
  for (const SampleRecord& r : m.records) {
    for (const auto& p : {r.image_path, r.depth_path, r.seg_path})
      missing += !(fs::is_regular_file(out / p) && fs::file_size(out / p) > 0);
    for (const auto& f : r.fields) {
      if (!f.fully_in_frame) continue;
      ++polygons;
      for (const Vec2& v : f.polygon) outside += !(v.x >= 0.0 && v.x <= 512.0 && v.y >= 0.0 && v.y <= 512.0);
    }
  }
  const unsigned cores = std::thread::hardware_concurrency();
  return {m.records.size() == 100 && missing == 0 && outside == 0 && secs < 1800.0,
          fmt("%zu records, %ld unresolved paths, %ld in-frame polygons with %ld outside vertices, %.0f s on %u "
              "hardware threads (limit 1800 s)",
              m.records.size(), missing, polygons, outside, secs, cores)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "white furnace", white_furnace},
      {2, "projection consistency", projection_consistency},
      {3, "depth correctness", depth_correctness},
      {4, "determinism across thread counts", determinism},
      {5, "periodic loss closed form", periodic_loss_closed_form},
      {6, "rotation labels", rotation_labels},
      {7, "sampler statistics", sampler_statistics},
      {8, "BVH oracle", bvh_oracle},
      {9, "segmentation oracle", segmentation_oracle},
      {10, "noise properties", noise_properties},
      {11, "end-to-end smoke", end_to_end},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
