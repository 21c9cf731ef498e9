#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docsynth/dataset.hpp"
#include "docsynth/sampler.hpp"
#include "docsynth/textures.hpp"

namespace docsynth {

enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSpecError = 2,
  kEmptyInput = 3,
  kUnwritableOutput = 4,
  kRenderFailure = 5,
};

struct Resolution {
  int width = 0;
  int height = 0;
};

struct RunConfig {
  std::filesystem::path spec_path;
  std::optional<std::filesystem::path> input_dir;   // defaults to the spec's, relative to the spec file
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> count;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<int> spp;
  std::optional<Resolution> resolution;
  bool preview = false;
};

struct RunSummary {
  ExitCode status = ExitCode::kOk;
  std::string message;
  std::uint64_t samples = 0;
  std::optional<std::uint64_t> failed_sample;
  double wall_seconds = 0.0;
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> written;  // manifest, or preview files
};

/// Called after each finished sample with (done, total).
/// Everything a run needs before rendering: the spec with overrides applied,
/// resolved directories, discovered documents and patch references.
struct RunContext {
  RandomizationSpec spec;
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::vector<SheetSpec> documents;
  std::vector<std::string> patches;  // texture references relative to input_dir
  std::shared_ptr<TextureCache> textures;
};

/// Fills `out` from `cfg`; returns the failing summary (spec, input or usage
/// error) or nullopt. Nothing is written.
std::optional<RunSummary> load_run(const RunConfig& cfg, RunContext& out);

using ProgressFn = std::function<void(std::uint64_t, std::uint64_t)>;

RunSummary run_generate(const RunConfig& cfg, const ProgressFn& progress = {});
RunSummary run_preview(const RunConfig& cfg);

/// A base document: the texture reference is relative to the input root.
/// Labels and fields come from an optional sidecar `<image>.json`
/// ({"class_label": ..., "fields": [{"name": ..., "uv_rect": [u0, v0, u1, v1]}]}),
/// otherwise the class is the image's parent directory name (or its stem
/// for top-level files).
std::vector<SheetSpec> discover_documents(const std::filesystem::path& input_dir, TextureCache& textures);

/// Sorted supported images (png, jpg, jpeg) below `dir`, recursively.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Everything produced for one sample, before files are written.
struct SampleResult {
  SampleRecord record;
  RenderPasses passes;
};

/// Samples, renders and labels sample `index`. `render_threads` only affects speed.
SampleResult generate_sample(const RandomizationSpec& spec, const std::vector<SheetSpec>& documents,
                             const std::vector<std::string>& patches, TextureCache& textures, std::uint64_t index,
                             int render_threads);

/// Ground-truth labels for a prepared scene.
void compute_labels(const SceneInstance& scene, const PreparedScene& prepared, RotationLabelMode mode,
                    SampleRecord& record);

}  // namespace docsynth
