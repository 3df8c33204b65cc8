#include "detkit/image.hpp"

#include <algorithm>
#include <cmath>

#include "detkit/error.hpp"

namespace detkit {

RasterImage::RasterImage(Size size, Rgb fill)
    : size_(size),
      pixels_(static_cast<std::size_t>(std::max(size.width, 0)) *
                  static_cast<std::size_t>(std::max(size.height, 0)),
              fill) {
  if (size.width <= 0 || size.height <= 0) throw RangeError("image size must be positive");
}

RasterImage::RasterImage(Size size, std::vector<Rgb> pixels) : size_(size), pixels_(std::move(pixels)) {
  if (size.width <= 0 || size.height <= 0) throw RangeError("image size must be positive");
  if (pixels_.size() != static_cast<std::size_t>(size.width) * static_cast<std::size_t>(size.height)) {
    throw FormatError("pixel count does not match image size");
  }
}

namespace {

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Tap {
  int i0, i1;
  double f;
};

Tap source_tap(int dst_index, int src_len, int dst_len) {
  double s = (dst_index + 0.5) * static_cast<double>(src_len) / dst_len - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
  const int i0 = static_cast<int>(std::floor(s));
  const int i1 = std::min(i0 + 1, src_len - 1);
  return {i0, i1, s - i0};
}

}  // namespace

RasterImage resize_bilinear(const RasterImage& src, Size dst) {
  if (dst == src.size()) return src;
  RasterImage out(dst);
  std::vector<Tap> xs(dst.width);
  for (int x = 0; x < dst.width; ++x) xs[x] = source_tap(x, src.width(), dst.width);
  for (int y = 0; y < dst.height; ++y) {
    const Tap ty = source_tap(y, src.height(), dst.height);
    for (int x = 0; x < dst.width; ++x) {
      const Tap& tx = xs[x];
      const Rgb& p00 = src.at(tx.i0, ty.i0);
      const Rgb& p10 = src.at(tx.i1, ty.i0);
      const Rgb& p01 = src.at(tx.i0, ty.i1);
      const Rgb& p11 = src.at(tx.i1, ty.i1);
      auto mix = [&](auto channel) {
        const double top = channel(p00) * (1.0 - tx.f) + channel(p10) * tx.f;
        const double bottom = channel(p01) * (1.0 - tx.f) + channel(p11) * tx.f;
        return to_u8(top * (1.0 - ty.f) + bottom * ty.f);
      };
      out.at(x, y) = {mix([](const Rgb& p) { return double(p.r); }),
                      mix([](const Rgb& p) { return double(p.g); }),
                      mix([](const Rgb& p) { return double(p.b); })};
    }
  }
  return out;
}

RasterImage letterbox_image(const RasterImage& src, const LetterboxTransform& t) {
  const RasterImage scaled = resize_bilinear(src, t.scaled);
  RasterImage out(t.dst, kFillGray);
  for (int y = 0; y < t.scaled.height; ++y) {
    for (int x = 0; x < t.scaled.width; ++x) out.at(x + t.pad_x, y + t.pad_y) = scaled.at(x, y);
  }
  return out;
}

}  // namespace detkit
