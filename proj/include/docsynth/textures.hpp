#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "docsynth/image.hpp"

namespace docsynth {

/// Names of the procedural surface textures ("wood", "marble", ...).
const std::vector<std::string>& builtin_texture_names();
bool is_builtin_texture(const std::string& name);

/// Renders a built-in procedural texture. Deterministic in (name, seed).
ImageBuffer procedural_texture(const std::string& name, std::uint64_t seed, int size = 512);

/// Resolves texture references to shared, immutable images.
///
/// A reference is either a built-in name, "builtin:<name>", or a file path
/// (optionally prefixed "file:") relative to the cache root. Built-ins are
/// keyed by (name, seed) so surfaces vary between scenes.
class TextureCache {
 public:
  explicit TextureCache(std::filesystem::path root = {});

  std::shared_ptr<const ImageBuffer> get(const std::string& reference, std::uint64_t seed = 0);
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const ImageBuffer>> cache_;
};

}  // namespace docsynth
