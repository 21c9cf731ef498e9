#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docsynth/groundtruth.hpp"
#include "docsynth/render.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

inline constexpr const char* kToolVersion = "0.1.0";
/// Stands in for +infinity (misses) in depth files.
inline constexpr float kDepthMissSentinel = 3.4e38f;

struct SampleRecord {
  std::uint64_t sample_id = 0;
  std::string image_path;  // relative to the dataset root
  std::string depth_path;
  std::string seg_path;
  std::string class_label;
  SceneInstance scene;
  AngleLabel angle;
  std::optional<Homography> homography;  // planar sheets only
  std::vector<ProjectedField> fields;
  bool operator==(const SampleRecord&) const = default;
};

struct ManifestHeader {
  std::uint64_t spec_hash = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t count = 0;
  std::string tool_version = kToolVersion;
  std::string rotation_label_mode = "projected";
  bool operator==(const ManifestHeader&) const = default;
};

struct DatasetManifest {
  ManifestHeader header;
  std::vector<SampleRecord> records;
  bool operator==(const DatasetManifest&) const = default;
};

/// images/000007.png, depth/000007_depth.pfm, seg/000007_seg.png
SampleRecord record_paths(std::uint64_t sample_id);

/// One manifest line (no trailing newline). Keys are sorted and floats use
/// the shortest representation that round-trips.
std::string serialize_record(const SampleRecord& record);
SampleRecord parse_record(std::string_view line);
std::string serialize_header(const ManifestHeader& header);
ManifestHeader parse_header(std::string_view line);

std::string scene_to_json(const SceneInstance& scene);
SceneInstance scene_from_json(std::string_view text);

/// Writes beauty, depth and seg files at the record's paths below out_dir.
/// Throws IoError(kPathCollision) if any target exists.
std::vector<std::filesystem::path> write_sample(const std::filesystem::path& out_dir, const SampleRecord& record,
                                                const RenderPasses& passes);

/// Writes out_dir/manifest.jsonl atomically: header line, then records
/// ordered by sample_id.
std::filesystem::path write_manifest(const std::filesystem::path& out_dir, const ManifestHeader& header,
                                     std::vector<SampleRecord> records);
DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// Little-endian PFM ("Pf", scale -1), rows stored bottom to top. +inf is
/// written as kDepthMissSentinel and read back as +inf.
void write_pfm(const std::filesystem::path& path, int width, int height, std::span<const float> values);
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // top row first
};
FloatImage read_pfm(const std::filesystem::path& path);

}  // namespace docsynth
