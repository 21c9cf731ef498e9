#include "docsynth/textures.hpp"

#include <algorithm>
#include <cmath>

#include "docsynth/errors.hpp"
#include "docsynth/rng.hpp"

namespace docsynth {

namespace {

// Periodic value noise on a `period`-cell lattice so textures tile.
class ValueNoise {
 public:
  ValueNoise(std::uint64_t seed, int period) : seed_(seed), period_(period) {}

  double operator()(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = smooth(x - fx);
    const double ty = smooth(y - fy);
    const double a = lattice(ix, iy), b = lattice(ix + 1, iy);
    const double c = lattice(ix, iy + 1), d = lattice(ix + 1, iy + 1);
    return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
  }

  double fbm(double x, double y, int octaves) const {
    double sum = 0.0, amp = 0.5, norm = 0.0, scale = 1.0;
    for (int o = 0; o < octaves; ++o) {
      sum += amp * ValueNoise(seed_ + static_cast<std::uint64_t>(o), period_ * static_cast<int>(scale))(x * scale, y * scale);
      norm += amp;
      amp *= 0.5;
      scale *= 2.0;
    }
    return sum / norm;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double lattice(int x, int y) const {
    const auto wx = static_cast<std::uint64_t>(((x % period_) + period_) % period_);
    const auto wy = static_cast<std::uint64_t>(((y % period_) + period_) % period_);
    return static_cast<double>(mix64(seed_ ^ mix64(wx * 0x9e3779b97f4a7c15ULL + wy)) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  int period_;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) { return a + (b - a) * t; }

const std::vector<std::string> kBuiltins = {"wood", "marble", "checker", "plain", "slate", "fabric", "paper", "lined"};

}  // namespace

const std::vector<std::string>& builtin_texture_names() { return kBuiltins; }

bool is_builtin_texture(const std::string& name) {
  return std::find(kBuiltins.begin(), kBuiltins.end(), name) != kBuiltins.end();
}

ImageBuffer procedural_texture(const std::string& name, std::uint64_t seed, int size) {
  if (!is_builtin_texture(name)) throw InvalidArgument("unknown built-in texture '" + name + "'");
  ImageBuffer img(size, size, 3);
  const StreamKey key = StreamKey{seed}.derive(name);
  RngStream rng(key.derive("palette"));
  const double hue_shift = rng.uniform();
  const ValueNoise noise(key.derive("noise").value, 8);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size;
      const double v = (y + 0.5) / size;
      Rgb c;
      if (name == "wood") {
        const double grain = noise.fbm(u * 8, v * 2, 4);
        const double rings = 0.5 + 0.5 * std::sin((v * 24.0 + grain * 6.0) * kPi);
        c = lerp(Rgb{0.18, 0.08, 0.03}, Rgb{0.42, 0.22, 0.09}, rings * (0.7 + 0.3 * hue_shift));
      } else if (name == "marble") {
        const double t = 0.5 + 0.5 * std::sin((u * 6.0 + noise.fbm(u * 8, v * 8, 5) * 5.0) * kPi);
        c = lerp(Rgb{0.45, 0.45, 0.48}, Rgb{0.85, 0.84, 0.82}, std::pow(t, 0.5));
      } else if (name == "checker") {
        const bool odd = ((x * 8 / size) + (y * 8 / size)) % 2 == 1;
        c = odd ? Rgb{0.1, 0.1, 0.1} : Rgb{0.6, 0.6, 0.6};
      } else if (name == "plain") {
        c = Rgb{0.35, 0.35, 0.35} * (0.8 + 0.4 * hue_shift);
      } else if (name == "slate") {
        c = Rgb{0.06, 0.07, 0.08} * (0.7 + 0.6 * noise.fbm(u * 16, v * 16, 4));
      } else if (name == "fabric") {
        const double weave = 0.5 + 0.25 * (std::sin(u * size * 0.5) + std::sin(v * size * 0.5));
        c = lerp(Rgb{0.05, 0.10, 0.25}, Rgb{0.20, 0.30, 0.55}, weave * (0.6 + 0.4 * noise(u * 32, v * 32)));
      } else if (name == "paper") {
        c = Rgb{0.85, 0.85, 0.82} * (0.97 + 0.03 * noise.fbm(u * 32, v * 32, 3));
      } else {  // lined
        const double line = std::fmod(v * 32.0, 1.0) < 0.06 ? 1.0 : 0.0;
        const bool margin = u > 0.12 && u < 0.125;
        c = margin ? Rgb{0.6, 0.1, 0.1} : lerp(Rgb{0.85, 0.85, 0.82}, Rgb{0.25, 0.4, 0.7}, line);
      }
      img.at(x, y, 0) = static_cast<float>(std::clamp(c.x, 0.0, 1.0));
      img.at(x, y, 1) = static_cast<float>(std::clamp(c.y, 0.0, 1.0));
      img.at(x, y, 2) = static_cast<float>(std::clamp(c.z, 0.0, 1.0));
    }
  }
  return img;
}

TextureCache::TextureCache(std::filesystem::path root) : root_(std::move(root)) {}

std::shared_ptr<const ImageBuffer> TextureCache::get(const std::string& reference, std::uint64_t seed) {
  std::string name = reference;
  bool builtin = false;
  if (name.rfind("builtin:", 0) == 0) {
    name = name.substr(8);
    builtin = true;
  } else if (name.rfind("file:", 0) == 0) {
    name = name.substr(5);
  } else {
    builtin = is_builtin_texture(name);
  }
  const std::string cache_key = builtin ? "builtin:" + name + "#" + std::to_string(seed) : "file:" + name;
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(cache_key); it != cache_.end()) return it->second;
  }
  std::shared_ptr<const ImageBuffer> image;
  if (builtin) {
    image = std::make_shared<ImageBuffer>(procedural_texture(name, seed));
  } else {
    const std::filesystem::path path(name);
    image = std::make_shared<ImageBuffer>(load_image(path.is_absolute() ? path : root_ / path));
  }
  std::lock_guard lock(mutex_);
  return cache_.emplace(cache_key, std::move(image)).first->second;
}

}  // namespace docsynth
