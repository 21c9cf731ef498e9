#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "docsynth/rng.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

struct ParamRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ParamRange&) const = default;
};

/// Weighted choices in declaration order.
struct CategoricalDist {
  std::vector<std::pair<std::string, double>> items;
  bool operator==(const CategoricalDist&) const = default;
};

using ParamEntry = std::variant<ParamRange, CategoricalDist>;

enum class ParamKind { kContinuous, kInteger, kCategorical };

/// One entry of the scene-parameter vocabulary.
struct ParamInfo {
  std::string path;
  ParamKind kind = ParamKind::kContinuous;
  double default_value = 0.0;     // continuous and integer parameters
  std::string default_choice;     // categorical parameters
  double domain_min = 0.0;
  double domain_max = 0.0;
  std::vector<std::string> choices;  // empty: open vocabulary, see accepts_choice
  std::string description;
};

const std::vector<ParamInfo>& parameter_vocabulary();
const ParamInfo* find_parameter(std::string_view path);

enum class RotationLabelMode { kProjected, kCameraRoll };

struct RenderDefaults {
  int width = 512;
  int height = 512;
  int spp = 16;
  int max_depth = 4;
  int tile = 32;
  bool operator==(const RenderDefaults&) const = default;
};

struct RandomizationSpec {
  std::string input_dir;
  std::string output_dir;
  std::string patch_dir;  // empty disables content patches
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  RenderDefaults render;
  int sheet_grid = 64;
  std::vector<std::string> deformation_order{"bend", "fold", "roughness"};
  RotationLabelMode rotation_label_mode = RotationLabelMode::kProjected;
  std::vector<std::pair<std::string, ParamEntry>> params;  // declaration order
  std::uint64_t source_hash = 0;  // FNV-1a 64 of the spec text

  const ParamEntry* find(std::string_view path) const;
};

/// Parses a JSON randomization spec. Throws SpecError.
RandomizationSpec parse_spec(std::string_view text);

/// min + u * (max - min), clamped into the range.
double sample_continuous(const ParamRange& range, double u);
double sample_continuous(const ParamRange& range, StreamKey key);

/// Item i is selected iff u lies in [cdf(i-1), cdf(i)).
const std::string& sample_categorical(const CategoricalDist& dist, double u);
const std::string& sample_categorical(const CategoricalDist& dist, StreamKey key);

/// Key for parameter `path` of sample `index`.
StreamKey parameter_key(std::uint64_t master_seed, std::uint64_t index, std::string_view path);

/// Seed of the per-sample render and style streams.
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index);

/// Uniform with-replacement choice of a base document index in [0, n).
std::size_t choose_document(std::uint64_t master_seed, std::uint64_t index, std::size_t n);

/// Resolves every scene parameter for sample `index`. `patches` lists content
/// patch references; when non-empty one is stamped on the document.
SceneInstance sample_scene(const RandomizationSpec& spec, const SheetSpec& base_doc, std::uint64_t index,
                           std::span<const std::string> patches = {});

/// Throws InvalidArgument when a recorded value lies outside its spec range
/// or distribution.
void check_membership(const RandomizationSpec& spec, const SceneInstance& scene);

}  // namespace docsynth
