#include "docsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <nlohmann/json.hpp>

#include "docsynth/errors.hpp"
#include "docsynth/image.hpp"

namespace docsynth {

namespace fs = std::filesystem;

namespace {

bool is_supported_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::kReadFailed, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunSummary failure(ExitCode status, std::string message) {
  RunSummary s;
  s.status = status;
  s.message = std::move(message);
  return s;
}

fs::path resolve_against(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

}  // namespace

std::optional<RunSummary> load_run(const RunConfig& cfg, RunContext& out) {
  RunSummary fail;
  try {
    out.spec = parse_spec(read_file(cfg.spec_path));
  } catch (const SpecError& e) {
    fail.status = ExitCode::kSpecError;
    fail.message = cfg.spec_path.string() + ": " + e.what();
    return fail;
  } catch (const IoError& e) {
    fail.status = ExitCode::kSpecError;
    fail.message = e.what();
    return fail;
  }
  auto& spec = out.spec;
  if (cfg.count) spec.count = *cfg.count;
  if (cfg.seed) spec.seed = *cfg.seed;
  if (cfg.spp) {
    if (*cfg.spp < 1) return failure(ExitCode::kSpecError, "--spp must be >= 1");
    spec.render.spp = *cfg.spp;
  }
  if (cfg.resolution) {
    if (cfg.resolution->width < 1 || cfg.resolution->height < 1)
      return failure(ExitCode::kSpecError, "--res must be positive");
    spec.render.width = cfg.resolution->width;
    spec.render.height = cfg.resolution->height;
  }
  if (cfg.threads < 1) return failure(ExitCode::kUsage, "--threads must be >= 1");

  const fs::path spec_dir = fs::absolute(cfg.spec_path).parent_path();
  if (cfg.input_dir) out.input_dir = fs::absolute(*cfg.input_dir);
  else if (!spec.input_dir.empty()) out.input_dir = resolve_against(spec_dir, spec.input_dir);
  else return failure(ExitCode::kEmptyInput, "no input directory given");
  if (cfg.output_dir) out.output_dir = fs::absolute(*cfg.output_dir);
  else if (!spec.output_dir.empty()) out.output_dir = resolve_against(spec_dir, spec.output_dir);
  else return failure(ExitCode::kUnwritableOutput, "no output directory given");
  out.input_dir = out.input_dir.lexically_normal();
  out.output_dir = out.output_dir.lexically_normal();

  out.textures = std::make_shared<TextureCache>(out.input_dir);
  try {
    out.documents = discover_documents(out.input_dir, *out.textures);
  } catch (const Error& e) {
    return failure(ExitCode::kEmptyInput, e.what());
  }
  if (out.documents.empty())
    return failure(ExitCode::kEmptyInput, "no supported images in " + out.input_dir.string());
  if (!spec.patch_dir.empty()) {
    const fs::path patch_dir = resolve_against(spec_dir, spec.patch_dir).lexically_normal();
    for (const auto& p : list_images(patch_dir))
      out.patches.push_back("file:" + p.lexically_relative(out.input_dir).generic_string());
    if (out.patches.empty()) return failure(ExitCode::kEmptyInput, "no patch images in " + patch_dir.string());
  }
  return std::nullopt;
}

namespace {

std::optional<RunSummary> prepare_output(const fs::path& dir, bool preview) {
  std::error_code ec;
  if (!preview && fs::exists(dir / "manifest.jsonl", ec))
    return failure(ExitCode::kUnwritableOutput, (dir / "manifest.jsonl").string() + " already exists");
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir, ec)) return failure(ExitCode::kUnwritableOutput, "cannot create " + dir.string());
  // Probe writability up front rather than failing after rendering.
  const fs::path probe = dir / ".docsynth-write-probe";
  {
    std::ofstream f(probe);
    if (!f) return failure(ExitCode::kUnwritableOutput, dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
  return std::nullopt;
}

UvRect parse_rect(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

// Depth normalization for previews: nearest hit black, farthest finite white, misses black.
std::vector<std::uint8_t> depth_panel(const RenderPasses& p) {
  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  for (float d : p.depth)
    if (std::isfinite(d)) lo = std::min(lo, d), hi = std::max(hi, d);
  std::vector<std::uint8_t> out(p.depth.size() * 3, 0);
  for (std::size_t i = 0; i < p.depth.size(); ++i) {
    const float d = p.depth[i];
    if (!std::isfinite(d)) continue;
    const double t = hi > lo ? (d - lo) / (hi - lo) : 0.0;
    const auto v = static_cast<std::uint8_t>(std::lround(255.0 * t));
    out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = v;
  }
  return out;
}

void put(std::vector<std::uint8_t>& img, int w, int h, int x, int y, std::array<std::uint8_t, 3> c) {
  if (x < 0 || y < 0 || x >= w || y >= h) return;
  const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
  img[i] = c[0], img[i + 1] = c[1], img[i + 2] = c[2];
}

void line(std::vector<std::uint8_t>& img, int w, int h, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
  // Bresenham; endpoints far outside the frame are clamped by step count.
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (int steps = 0; steps < 1 << 16; ++steps) {
    put(img, w, h, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) err += dy, x0 += sx;
    if (e2 <= dx) err += dx, y0 += sy;
  }
}

int pixel_of(double v) { return static_cast<int>(std::floor(std::clamp(v, -1e6, 1e6))); }

}  // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(dir, ec))
    if (entry.is_regular_file() && is_supported_image(entry.path())) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SheetSpec> discover_documents(const fs::path& input_dir, TextureCache& textures) {
  std::vector<SheetSpec> docs;
  for (const auto& path : list_images(input_dir)) {
    const fs::path rel = path.lexically_relative(input_dir);
    SheetSpec sheet;
    sheet.texture = "file:" + rel.generic_string();
    const auto image = textures.get(sheet.texture);
    sheet.height_m = sheet.width_m * image->height() / image->width();
    sheet.class_label = rel.has_parent_path() ? rel.parent_path().filename().string() : rel.stem().string();
    fs::path sidecar = path;
    sidecar += ".json";
    if (fs::exists(sidecar)) {
      try {
        const auto j = nlohmann::json::parse(read_file(sidecar));
        if (j.contains("class_label")) sheet.class_label = j.at("class_label").get<std::string>();
        if (j.contains("fields"))
          for (const auto& f : j.at("fields")) sheet.fields.push_back({f.at("name").get<std::string>(), parse_rect(f.at("uv_rect"))});
      } catch (const nlohmann::json::exception& e) {
        throw IoError(IoErrorKind::kMalformed, sidecar.string() + ": " + e.what());
      }
    }
    validate(sheet);
    docs.push_back(std::move(sheet));
  }
  return docs;
}

void compute_labels(const SceneInstance& scene, const PreparedScene& prepared, RotationLabelMode mode,
                    SampleRecord& record) {
  const UvMap uv_map(prepared.sheet_mesh);
  record.class_label = scene.sheet.class_label;
  record.angle = mode == RotationLabelMode::kCameraRoll ? make_angle_label(scene.camera.roll_theta)
                                                        : rotation_label(scene.camera, uv_map);
  record.homography.reset();
  if (const auto plane = sheet_plane(prepared.sheet_mesh)) {
    try {
      record.homography = homography_doc_to_image(scene.camera, plane);
    } catch (const GeometryError&) {
      // Camera in the sheet plane: no projective map exists.
    }
  }
  record.fields.clear();
  for (const auto& field : scene.sheet.fields)
    record.fields.push_back(project_field(scene.camera, uv_map, field, prepared));
}

SampleResult generate_sample(const RandomizationSpec& spec, const std::vector<SheetSpec>& documents,
                             const std::vector<std::string>& patches, TextureCache& textures, std::uint64_t index,
                             int render_threads) {
  const SheetSpec& doc = documents[choose_document(spec.seed, index, documents.size())];
  SampleResult result;
  result.record = record_paths(index);
  result.record.scene = sample_scene(spec, doc, index, patches);
  const PreparedScene prepared = prepare_scene(result.record.scene, textures);
  result.passes = render(prepared, render_threads);
  compute_labels(result.record.scene, prepared, spec.rotation_label_mode, result.record);
  return result;
}

RunSummary run_generate(const RunConfig& cfg, const ProgressFn& progress) {
  const auto start = std::chrono::steady_clock::now();
  RunContext run;
  if (auto fail = load_run(cfg, run)) return *fail;
  if (auto fail = prepare_output(run.output_dir, false)) return *fail;

  const std::uint64_t count = run.spec.count;
  const int workers = static_cast<int>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(count, cfg.threads)));
  const int render_threads = std::max(1, cfg.threads / workers);
  std::vector<SampleRecord> records(count);
  std::atomic<std::uint64_t> next{0}, done{0};
  std::atomic<bool> failed{false};
  std::mutex mutex;
  std::optional<std::uint64_t> failed_id;
  std::string failure_message;
  ExitCode failure_code = ExitCode::kRenderFailure;

  const auto worker = [&] {
    for (std::uint64_t i = next++; i < count && !failed; i = next++) {
      try {
        SampleResult r = generate_sample(run.spec, run.documents, run.patches, *run.textures, i, render_threads);
        write_sample(run.output_dir, r.record, r.passes);
        records[i] = std::move(r.record);
        const auto n = ++done;
        if (progress) {
          std::lock_guard lock(mutex);
          progress(n, count);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        failed = true;
        // Report the smallest failing id so the message does not depend on scheduling.
        if (!failed_id || i < *failed_id) {
          failed_id = i;
          failure_message = e.what();
          const auto* io = dynamic_cast<const IoError*>(&e);
          failure_code = io && (io->kind() == IoErrorKind::kWriteFailed || io->kind() == IoErrorKind::kPathCollision)
                             ? ExitCode::kUnwritableOutput
                             : ExitCode::kRenderFailure;
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }

  RunSummary summary;
  summary.output_dir = run.output_dir;
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (failed_id) {
    summary.status = failure_code;
    summary.failed_sample = failed_id;
    summary.samples = done;
    summary.message = "sample " + std::to_string(*failed_id) + " failed: " + failure_message;
    return summary;
  }
  ManifestHeader header;
  header.spec_hash = run.spec.source_hash;
  header.master_seed = run.spec.seed;
  header.count = count;
  header.rotation_label_mode =
      run.spec.rotation_label_mode == RotationLabelMode::kCameraRoll ? "camera_roll" : "projected";
  try {
    summary.written.push_back(write_manifest(run.output_dir, header, std::move(records)));
  } catch (const Error& e) {
    return failure(ExitCode::kUnwritableOutput, e.what());
  }
  summary.samples = count;
  summary.message = "generated " + std::to_string(count) + " samples";
  return summary;
}

RunSummary run_preview(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunContext run;
  if (auto fail = load_run(cfg, run)) return *fail;
  if (auto fail = prepare_output(run.output_dir, true)) return *fail;
  if (!cfg.spp) run.spec.render.spp = std::min(run.spec.render.spp, 8);

  RunSummary summary;
  summary.output_dir = run.output_dir;
  SampleResult r;
  try {
    r = generate_sample(run.spec, run.documents, run.patches, *run.textures, 0, cfg.threads);
  } catch (const std::exception& e) {
    summary.status = ExitCode::kRenderFailure;
    summary.failed_sample = 0;
    summary.message = std::string("sample 0 failed: ") + e.what();
    return summary;
  }
  const int w = r.passes.width, h = r.passes.height;
  const auto beauty = tonemap(r.passes.rgb);
  const auto depth = depth_panel(r.passes);
  std::vector<std::uint8_t> overlay = beauty;
  for (const auto& field : r.record.fields) {
    const auto& poly = field.polygon;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
      line(overlay, w, h, pixel_of(a.x), pixel_of(a.y), pixel_of(b.x), pixel_of(b.y), {40, 220, 60});
    }
    for (const Vec2 p : poly) put(overlay, w, h, pixel_of(p.x), pixel_of(p.y), {255, 0, 0});
  }
  std::vector<std::uint8_t> triptych(static_cast<std::size_t>(3 * w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const auto row = [&](const std::vector<std::uint8_t>& src, int panel) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y) * w * 3, w * 3,
                  triptych.begin() + (static_cast<std::ptrdiff_t>(y) * 3 * w + panel * w) * 3);
    };
    row(beauty, 0);
    row(depth, 1);
    row(overlay, 2);
  }
  try {
    const fs::path image = run.output_dir / "preview.png";
    write_png_rgb8(image, 3 * w, h, triptych);
    const fs::path meta = run.output_dir / "preview.json";
    std::ofstream out(meta, std::ios::binary | std::ios::trunc);
    out << serialize_record(r.record) << '\n';
    if (!out.flush()) throw IoError(IoErrorKind::kWriteFailed, "failed writing " + meta.string());
    summary.written = {image, meta};
  } catch (const Error& e) {
    return failure(ExitCode::kUnwritableOutput, e.what());
  }
  summary.samples = 1;
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary.message = "preview written";
  return summary;
}

}  // namespace docsynth
