#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "docsynth/geometry.hpp"
#include "docsynth/rng.hpp"
#include "docsynth/scene.hpp"

namespace docsynth {

/// Interleaved linear-light image. Channels: 1 (gray), 2 (gray+alpha),
/// 3 (rgb) or 4 (rgb+alpha). Alpha is stored linearly.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  bool has_alpha() const { return channels_ == 2 || channels_ == 4; }
  int color_channels() const { return has_alpha() ? channels_ - 1 : channels_; }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  /// Linear RGB at a texel; gray images broadcast.
  Rgb rgb(int x, int y) const;
  float alpha(int x, int y) const { return has_alpha() ? at(x, y, channels_ - 1) : 1.0f; }

  /// Bilinear lookup at continuous texel coordinates (texel centers at +0.5).
  /// `wrap` repeats the image, otherwise coordinates clamp to the edge.
  Rgb sample_bilinear(double px, double py, bool wrap) const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);
/// Clip to [0, 1], apply the sRGB transfer function and round to 8 bits.
std::uint8_t encode_srgb8(double linear);
double decode_srgb8(std::uint8_t code);

/// Decode a PNG or JPEG file into linear light. Color samples are treated as
/// sRGB-encoded; alpha is kept linear.
ImageBuffer load_image(const std::filesystem::path& path);

/// 8-bit PNG of an sRGB-encoded linear image (1 to 4 channels).
void write_png_srgb8(const std::filesystem::path& path, const ImageBuffer& image);
/// 8-bit PNG storing raw byte values (labels, overlays already in display space).
void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     std::span<const std::uint8_t> pixels);
void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> pixels);
/// 16-bit grayscale PNG (big-endian samples as PNG requires).
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> pixels);

struct RawImage8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};
/// Reads an 8-bit PNG without any transfer-function conversion.
RawImage8 read_png_raw8(const std::filesystem::path& path);

/// Adds i.i.d. N(0, sigma^2) to every color sample and clamps to [0, 1].
/// Sample i of the image draws from `key.derive(i)`.
ImageBuffer gaussian_noise(const ImageBuffer& image, double sigma, StreamKey key);

/// Square-window (2r+1)^2 min/max filter per color channel, edge clamped.
ImageBuffer morphology(const ImageBuffer& image, MorphOp op, int radius);

/// Pixel rectangle [x0, x1) x [y0, y1) covered by a uv rect. Row 0 is the top
/// of the image, which is v = 1.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  bool operator==(const PixelRect&) const = default;
};
PixelRect uv_rect_to_pixels(const UvRect& rect, int width, int height);

/// Bilinearly resamples `patch` into the pixels covered by `rect` and
/// alpha-composites it over `doc`. The returned annotation registers the
/// stamped region under `field_name`.
std::pair<ImageBuffer, FieldAnnotation> stamp_patch(const ImageBuffer& doc, const ImageBuffer& patch,
                                                    const UvRect& rect, const std::string& field_name);

}  // namespace docsynth
