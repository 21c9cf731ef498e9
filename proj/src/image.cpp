#include "docsynth/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "docsynth/errors.hpp"

namespace docsynth {

ImageBuffer::ImageBuffer(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw ImageError(ImageErrorKind::kZeroDimension, "image dimensions must be positive");
  if (channels < 1 || channels > 4) throw InvalidArgument("image channels must be 1..4");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Rgb ImageBuffer::rgb(int x, int y) const {
  if (color_channels() == 1) {
    const double g = at(x, y, 0);
    return {g, g, g};
  }
  return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
}

namespace {

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

double sample_channel(const ImageBuffer& img, double px, double py, int c, bool wrap) {
  const double x = px - 0.5;
  const double y = py - 0.5;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double tx = x - fx0;
  const double ty = y - fy0;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const auto fetch = [&](int xi, int yi) -> double {
    if (wrap) {
      xi = wrap_index(xi, img.width());
      yi = wrap_index(yi, img.height());
    } else {
      xi = std::clamp(xi, 0, img.width() - 1);
      yi = std::clamp(yi, 0, img.height() - 1);
    }
    return img.at(xi, yi, c);
  };
  const double top = fetch(x0, y0) * (1.0 - tx) + fetch(x0 + 1, y0) * tx;
  const double bottom = fetch(x0, y0 + 1) * (1.0 - tx) + fetch(x0 + 1, y0 + 1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

}  // namespace

Rgb ImageBuffer::sample_bilinear(double px, double py, bool wrap) const {
  if (color_channels() == 1) {
    const double g = sample_channel(*this, px, py, 0, wrap);
    return {g, g, g};
  }
  return {sample_channel(*this, px, py, 0, wrap), sample_channel(*this, px, py, 1, wrap),
          sample_channel(*this, px, py, 2, wrap)};
}

double srgb_to_linear(double encoded) {
  return encoded <= 0.04045 ? encoded / 12.92 : std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
  return linear <= 0.0031308 ? linear * 12.92 : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

std::uint8_t encode_srgb8(double linear) {
  const double clipped = std::isnan(linear) ? 0.0 : std::clamp(linear, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(linear_to_srgb(clipped) * 255.0));
}

double decode_srgb8(std::uint8_t code) { return srgb_to_linear(code / 255.0); }

// ---------------------------------------------------------------------------
// PNG

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  return FilePtr(std::fopen(path.string().c_str(), mode));
}

void png_warning_silent(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint8_t> bytes;  // rows, 16-bit samples in host order
};

// Returns false on a libpng error (corrupt stream).
bool decode_png(std::FILE* fp, bool strip16, DecodedPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  if (strip16) png_set_strip_16(png);
  const int depth = png_get_bit_depth(png, info);
  if (!strip16 && depth == 16) {
    const std::uint16_t probe = 1;
    if (*reinterpret_cast<const std::uint8_t*>(&probe) == 1) png_set_swap(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.bytes.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

void encode_png(const std::filesystem::path& path, int width, int height, int channels, int bit_depth,
                const std::uint8_t* data) {
  if (width <= 0 || height <= 0) throw ImageError(ImageErrorKind::kZeroDimension, "cannot write an empty image");
  FilePtr fp = open_file(path, "wb");
  if (!fp) throw IoError(IoErrorKind::kWriteFailed, "cannot open " + path.string() + " for writing");
  static constexpr std::array<int, 5> kColorType = {0, PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA,
                                                    PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGB_ALPHA};
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(data + stride * y);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  volatile bool ok = png && info;
  if (ok && setjmp(png_jmpbuf(png))) ok = false;
  if (ok) {
    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 kColorType[static_cast<std::size_t>(channels)], PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) {
      const std::uint16_t probe = 1;
      if (*reinterpret_cast<const std::uint8_t*>(&probe) == 1) png_set_swap(png);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(png ? &png : nullptr, info ? &info : nullptr);
  if (!ok || std::fflush(fp.get()) != 0) throw IoError(IoErrorKind::kWriteFailed, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr) {}

bool decode_jpeg(std::FILE* fp, DecodedPng& out) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = cinfo.output_components;
  out.bit_depth = 8;
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.bytes.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

enum class Format { kPng, kJpeg, kUnknown };

Format sniff(std::FILE* fp) {
  std::array<unsigned char, 8> magic{};
  const std::size_t n = std::fread(magic.data(), 1, magic.size(), fp);
  std::rewind(fp);
  if (n >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) return Format::kPng;
  if (n >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return Format::kJpeg;
  return Format::kUnknown;
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  if (!fp) throw ImageError(ImageErrorKind::kIo, "cannot open " + path.string());
  DecodedPng decoded;
  const Format format = sniff(fp.get());
  bool ok = false;
  switch (format) {
    case Format::kPng:
      ok = decode_png(fp.get(), false, decoded);
      break;
    case Format::kJpeg:
      ok = decode_jpeg(fp.get(), decoded);
      break;
    case Format::kUnknown:
      throw ImageError(ImageErrorKind::kUnsupportedFormat, path.string() + ": not a PNG or JPEG file");
  }
  if (!ok) throw ImageError(ImageErrorKind::kCorrupt, path.string() + ": corrupt or unsupported image data");
  if (decoded.width <= 0 || decoded.height <= 0)
    throw ImageError(ImageErrorKind::kZeroDimension, path.string() + ": zero-dimension image");

  ImageBuffer img(decoded.width, decoded.height, decoded.channels);
  const bool has_alpha = img.has_alpha();
  const auto samples = static_cast<std::size_t>(decoded.width) * decoded.height * decoded.channels;
  // Lookup for 8-bit codes.
  std::array<float, 256> lut{};
  for (int c = 0; c < 256; ++c) lut[static_cast<std::size_t>(c)] = static_cast<float>(decode_srgb8(static_cast<std::uint8_t>(c)));
  auto data = img.data();
  for (std::size_t i = 0; i < samples; ++i) {
    const bool alpha = has_alpha && (i % static_cast<std::size_t>(decoded.channels)) ==
                                        static_cast<std::size_t>(decoded.channels - 1);
    if (decoded.bit_depth == 16) {
      std::uint16_t v;
      std::memcpy(&v, decoded.bytes.data() + 2 * i, 2);
      const double x = v / 65535.0;
      data[i] = static_cast<float>(alpha ? x : srgb_to_linear(x));
    } else {
      const std::uint8_t v = decoded.bytes[i];
      data[i] = alpha ? static_cast<float>(v / 255.0) : lut[v];
    }
  }
  return img;
}

RawImage8 read_png_raw8(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  if (!fp) throw ImageError(ImageErrorKind::kIo, "cannot open " + path.string());
  if (sniff(fp.get()) != Format::kPng) throw ImageError(ImageErrorKind::kUnsupportedFormat, path.string() + ": not a PNG");
  DecodedPng decoded;
  if (!decode_png(fp.get(), true, decoded)) throw ImageError(ImageErrorKind::kCorrupt, path.string() + ": corrupt PNG");
  return {decoded.width, decoded.height, decoded.channels, std::move(decoded.bytes)};
}

void write_png_srgb8(const std::filesystem::path& path, const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes(image.data().size());
  const int channels = image.channels();
  const auto data = image.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const bool alpha = image.has_alpha() && static_cast<int>(i % static_cast<std::size_t>(channels)) == channels - 1;
    bytes[i] = alpha ? static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(data[i]), 0.0, 1.0) * 255.0))
                     : encode_srgb8(data[i]);
  }
  encode_png(path, image.width(), image.height(), channels, 8, bytes.data());
}

void write_png_gray8(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) throw InvalidArgument("pixel count mismatch");
  encode_png(path, width, height, 1, 8, pixels.data());
}

void write_png_rgb8(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height * 3) throw InvalidArgument("pixel count mismatch");
  encode_png(path, width, height, 3, 8, pixels.data());
}

void write_png_gray16(const std::filesystem::path& path, int width, int height, std::span<const std::uint16_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) throw InvalidArgument("pixel count mismatch");
  encode_png(path, width, height, 1, 16, reinterpret_cast<const std::uint8_t*>(pixels.data()));
}

// ---------------------------------------------------------------------------
// Style noise

ImageBuffer gaussian_noise(const ImageBuffer& image, double sigma, StreamKey key) {
  if (sigma < 0.0) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0) return image;
  ImageBuffer out = image;
  const int channels = image.channels();
  const int color = image.color_channels();
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<int>(i % static_cast<std::size_t>(channels)) >= color) continue;
    RngStream rng(key.derive(static_cast<std::uint64_t>(i)));
    data[i] = static_cast<float>(std::clamp(data[i] + sigma * rng.normal(), 0.0, 1.0));
  }
  return out;
}

ImageBuffer morphology(const ImageBuffer& image, MorphOp op, int radius) {
  if (radius < 1) throw InvalidArgument("morphology radius must be >= 1");
  const int w = image.width(), h = image.height();
  const auto pick = [op](float a, float b) { return op == MorphOp::kErode ? std::min(a, b) : std::max(a, b); };
  ImageBuffer horizontal = image;
  for (int c = 0; c < image.color_channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float v = image.at(x, y, c);
        for (int dx = -radius; dx <= radius; ++dx) v = pick(v, image.at(std::clamp(x + dx, 0, w - 1), y, c));
        horizontal.at(x, y, c) = v;
      }
    }
  }
  ImageBuffer out = horizontal;
  for (int c = 0; c < image.color_channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float v = horizontal.at(x, y, c);
        for (int dy = -radius; dy <= radius; ++dy) v = pick(v, horizontal.at(x, std::clamp(y + dy, 0, h - 1), c));
        out.at(x, y, c) = v;
      }
    }
  }
  return out;
}

PixelRect uv_rect_to_pixels(const UvRect& rect, int width, int height) {
  return {static_cast<int>(std::lround(rect.u0 * width)), static_cast<int>(std::lround((1.0 - rect.v1) * height)),
          static_cast<int>(std::lround(rect.u1 * width)), static_cast<int>(std::lround((1.0 - rect.v0) * height))};
}

std::pair<ImageBuffer, FieldAnnotation> stamp_patch(const ImageBuffer& doc, const ImageBuffer& patch,
                                                    const UvRect& rect, const std::string& field_name) {
  validate(rect);
  if (patch.empty()) throw InvalidArgument("patch image is empty");
  const PixelRect px = uv_rect_to_pixels(rect, doc.width(), doc.height());
  if (px.x1 <= px.x0 || px.y1 <= px.y0) throw InvalidArgument("uv rect covers zero pixels");
  ImageBuffer out = doc;
  const int rw = px.x1 - px.x0;
  const int rh = px.y1 - px.y0;
  const double sx = static_cast<double>(patch.width()) / rw;
  const double sy = static_cast<double>(patch.height()) / rh;
  const int doc_color = doc.color_channels();
  const int patch_color = patch.color_channels();
  for (int y = px.y0; y < px.y1; ++y) {
    for (int x = px.x0; x < px.x1; ++x) {
      const double tx = (x - px.x0 + 0.5) * sx;
      const double ty = (y - px.y0 + 0.5) * sy;
      const double a = patch.has_alpha() ? sample_channel(patch, tx, ty, patch.channels() - 1, false) : 1.0;
      if (a <= 0.0) continue;
      std::array<double, 3> color{};
      for (int c = 0; c < patch_color; ++c) color[static_cast<std::size_t>(c)] = sample_channel(patch, tx, ty, c, false);
      if (patch_color == 1) color[1] = color[2] = color[0];
      if (doc_color == 1 && patch_color == 3) color[0] = 0.2126 * color[0] + 0.7152 * color[1] + 0.0722 * color[2];
      for (int c = 0; c < doc_color; ++c) {
        float& dst = out.at(x, y, c);
        dst = static_cast<float>(a * color[static_cast<std::size_t>(c)] + (1.0 - a) * dst);
      }
      if (doc.has_alpha()) {
        float& da = out.at(x, y, doc.channels() - 1);
        da = static_cast<float>(a + (1.0 - a) * da);
      }
    }
  }
  return {std::move(out), FieldAnnotation{field_name, rect}};
}

}  // namespace docsynth
