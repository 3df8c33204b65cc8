#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "detkit/geometry.hpp"

namespace detkit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kFillGray{127, 127, 127};

/// Row-major 8-bit RGB image.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(Size size, Rgb fill = {});
  RasterImage(Size size, std::vector<Rgb> pixels);

  Size size() const { return size_; }
  int width() const { return size_.width; }
  int height() const { return size_.height; }

  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }

  const std::vector<Rgb>& pixels() const { return pixels_; }
  std::vector<Rgb>& pixels() { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_;
  std::vector<Rgb> pixels_;
};

/// Bilinear resample with half-pixel centers; edge pixels are clamped.
RasterImage resize_bilinear(const RasterImage& src, Size dst);

/// Letterboxes `src` into `t.dst`, filling the padding with kFillGray.
RasterImage letterbox_image(const RasterImage& src, const LetterboxTransform& t);

/// PNG decode/encode. Grayscale, palette, 16-bit and alpha inputs are
/// converted to 8-bit RGB. Errors throw detkit::Error.
RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const RasterImage& image);

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace detkit
