#include "detkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "detkit/error.hpp"
#include "detkit/random.hpp"

namespace detkit {

Hsv rgb_to_hsv(Rgb p) {
  const double r = p.r / 255.0;
  const double g = p.g / 255.0;
  const double b = p.b / 255.0;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;
  Hsv out{0.0, max > 0.0 ? delta / max : 0.0, max};
  if (delta <= 0.0) return out;
  double h;
  if (max == r) {
    h = (g - b) / delta;
  } else if (max == g) {
    h = 2.0 + (b - r) / delta;
  } else {
    h = 4.0 + (r - g) / delta;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  out.h = h;
  return out;
}

namespace {

std::uint8_t to_u8(double unit) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(unit * 255.0), 0L, 255L));
}

}  // namespace

Rgb hsv_to_rgb(Hsv p) {
  const double v = p.v;
  if (p.s <= 0.0) return {to_u8(v), to_u8(v), to_u8(v)};
  const double h6 = (p.h - std::floor(p.h)) * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double lo = v * (1.0 - p.s);
  const double falling = v * (1.0 - p.s * f);
  const double rising = v * (1.0 - p.s * (1.0 - f));
  double r, g, b;
  switch (static_cast<int>(sector) % 6) {
    case 0: r = v; g = rising; b = lo; break;
    case 1: r = falling; g = v; b = lo; break;
    case 2: r = lo; g = v; b = rising; break;
    case 3: r = lo; g = falling; b = v; break;
    case 4: r = rising; g = lo; b = v; break;
    default: r = v; g = lo; b = falling; break;
  }
  return {to_u8(r), to_u8(g), to_u8(b)};
}

Hsv jitter_hsv(Hsv p, double s_scale, double v_scale, double h_shift) {
  p.s = std::clamp(p.s * s_scale, 0.0, 1.0);
  p.v = std::clamp(p.v * v_scale, 0.0, 1.0);
  double h = p.h + h_shift;
  h -= std::floor(h);
  p.h = h >= 1.0 ? 0.0 : h;
  return p;
}

RasterImage hsv_jitter(const RasterImage& image, double s_scale, double v_scale, double h_shift) {
  if (s_scale == 1.0 && v_scale == 1.0 && h_shift == 0.0) return image;
  RasterImage out = image;
  for (auto& px : out.pixels()) px = hsv_to_rgb(jitter_hsv(rgb_to_hsv(px), s_scale, v_scale, h_shift));
  return out;
}

namespace {

Annotation clamp_label(int class_id, BoxNorm b) {
  b.cx = std::clamp(b.cx, 0.0, 1.0);
  b.cy = std::clamp(b.cy, 0.0, 1.0);
  b.w = std::min(b.w, 1.0);
  b.h = std::min(b.h, 1.0);
  return {class_id, b};
}

}  // namespace

TransformResult random_crop(const Sample& sample, const PixelRect& crop, double min_box_retention) {
  const Size size = sample.image.size();
  const BoxPixel frame{0.0, 0.0, double(size.width), double(size.height)};
  const BoxPixel region{double(crop.x), double(crop.y), double(crop.width), double(crop.height)};
  if (crop.width <= 0 || crop.height <= 0 || intersect(frame, region).area() <= 0.0) {
    throw RangeError("crop rectangle does not intersect the image");
  }

  if (crop.x == 0 && crop.y == 0 && crop.width == size.width && crop.height == size.height) {
    return {sample, 0};
  }

  TransformResult result;
  const Size out_size{crop.width, crop.height};
  RasterImage out(out_size, kFillGray);
  const int x0 = std::max(0, crop.x);
  const int y0 = std::max(0, crop.y);
  const int x1 = std::min(size.width, crop.x + crop.width);
  const int y1 = std::min(size.height, crop.y + crop.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) out.at(x - crop.x, y - crop.y) = sample.image.at(x, y);
  }
  result.sample.image = std::move(out);

  const BoxPixel visible = intersect(frame, region);
  for (const auto& a : sample.annotations) {
    const BoxPixel original = intersect(norm_to_pixel(a.box, size), frame);
    const BoxPixel kept = intersect(original, visible);
    if (original.area() <= 0.0 || kept.width <= 0.0 || kept.height <= 0.0 ||
        kept.area() / original.area() < min_box_retention) {
      ++result.dropped;
      continue;
    }
    const BoxPixel local{kept.x_min - crop.x, kept.y_min - crop.y, kept.width, kept.height};
    result.sample.annotations.push_back(clamp_label(a.class_id, pixel_to_norm(local, out_size)));
  }
  return result;
}

namespace {

double channel(const Rgb& p, int c) { return c == 0 ? p.r : c == 1 ? p.g : p.b; }

}  // namespace

TransformResult rotate_sample(const Sample& sample, double angle_deg) {
  const SinCos r = sincos_degrees(angle_deg);
  if (r.sin == 0.0 && r.cos == 1.0) return {sample, 0};

  const RasterImage& src = sample.image;
  const Size size = src.size();
  const double ox = size.width / 2.0;
  const double oy = size.height / 2.0;
  auto fetch = [&](int x, int y) -> const Rgb& {
    if (x < 0 || y < 0 || x >= size.width || y >= size.height) return kFillGray;
    return src.at(x, y);
  };

  RasterImage out(size);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const double dx = x + 0.5 - ox;
      const double dy = y + 0.5 - oy;
      // Inverse rotation back into the source frame, in pixel-index units.
      const double u = ox + dx * r.cos + dy * r.sin - 0.5;
      const double v = oy - dx * r.sin + dy * r.cos - 0.5;
      const double fu = std::floor(u);
      const double fv = std::floor(v);
      if (fu < -1.0 || fv < -1.0 || fu >= size.width || fv >= size.height) {
        out.at(x, y) = kFillGray;
        continue;
      }
      const int x0 = static_cast<int>(fu);
      const int y0 = static_cast<int>(fv);
      const double ax = u - fu;
      const double ay = v - fv;
      const Rgb& p00 = fetch(x0, y0);
      const Rgb& p10 = fetch(x0 + 1, y0);
      const Rgb& p01 = fetch(x0, y0 + 1);
      const Rgb& p11 = fetch(x0 + 1, y0 + 1);
      std::uint8_t rgb[3];
      for (int c = 0; c < 3; ++c) {
        const double top = channel(p00, c) * (1.0 - ax) + channel(p10, c) * ax;
        const double bottom = channel(p01, c) * (1.0 - ax) + channel(p11, c) * ax;
        rgb[c] = static_cast<std::uint8_t>(std::clamp(std::lround(top * (1.0 - ay) + bottom * ay), 0L, 255L));
      }
      out.at(x, y) = {rgb[0], rgb[1], rgb[2]};
    }
  }

  TransformResult result;
  result.sample.image = std::move(out);
  for (const auto& a : sample.annotations) {
    if (const auto box = rotated_aabb(a.box, angle_deg, size)) {
      result.sample.annotations.push_back({a.class_id, *box});
    } else {
      ++result.dropped;
    }
  }
  return result;
}

Sample resize_sample(const Sample& sample, Size dst) {
  if (dst.width <= 0 || dst.height <= 0) throw RangeError("resize target must be positive");
  return {resize_bilinear(sample.image, dst), sample.annotations};
}

void validate(const AugmentParams& p) {
  if (!(p.saturation >= 1.0)) throw RangeError("saturation bound must be >= 1");
  if (!(p.exposure >= 1.0)) throw RangeError("exposure bound must be >= 1");
  if (!(p.hue >= 0.0 && p.hue <= 0.5)) throw RangeError("hue bound must be in [0, 0.5]");
  if (!(p.max_angle_deg >= 0.0)) throw RangeError("max angle must be >= 0");
  if (!(p.crop_jitter >= 0.0 && p.crop_jitter < 0.5)) throw RangeError("crop jitter must be in [0, 0.5)");
  if (!(p.min_box_retention > 0.0 && p.min_box_retention <= 1.0)) {
    throw RangeError("min box retention must be in (0, 1]");
  }
}

AugmentDraw draw_augmentation(const AugmentParams& params, std::uint64_t index, Size size) {
  CounterStream rng(params.seed, index);
  AugmentDraw d;
  const double left = rng.uniform01() * params.crop_jitter;
  const double right = rng.uniform01() * params.crop_jitter;
  const double top = rng.uniform01() * params.crop_jitter;
  const double bottom = rng.uniform01() * params.crop_jitter;
  d.angle_deg = rng.uniform(-params.max_angle_deg, params.max_angle_deg);
  d.s_scale = rng.uniform(1.0, params.saturation);
  if (rng.coin()) d.s_scale = 1.0 / d.s_scale;
  d.v_scale = rng.uniform(1.0, params.exposure);
  if (rng.coin()) d.v_scale = 1.0 / d.v_scale;
  d.h_shift = rng.uniform(-params.hue, params.hue);

  const double keep = std::min(1.0 - left - right, 1.0 - top - bottom);
  const int cw = std::clamp(static_cast<int>(std::lround(keep * size.width)), 1, size.width);
  const int ch = std::clamp(static_cast<int>(std::lround(keep * size.height)), 1, size.height);
  auto place = [](int slack, double lead, double trail) {
    if (lead + trail <= 0.0) return slack / 2;
    return static_cast<int>(std::lround(slack * lead / (lead + trail)));
  };
  d.crop = {place(size.width - cw, left, right), place(size.height - ch, top, bottom), cw, ch};
  return d;
}

AugmentResult augment_sample(const Sample& sample, const AugmentParams& params, std::uint64_t index) {
  validate(params);
  const Size size = sample.image.size();
  AugmentResult result;
  result.draw = draw_augmentation(params, index, size);

  TransformResult rotated = rotate_sample(sample, result.draw.angle_deg);
  TransformResult cropped = random_crop(rotated.sample, result.draw.crop, params.min_box_retention);
  Sample resized = resize_sample(cropped.sample, size);
  resized.image = hsv_jitter(resized.image, result.draw.s_scale, result.draw.v_scale, result.draw.h_shift);

  result.dropped = rotated.dropped + cropped.dropped;
  result.dropped_all = !sample.annotations.empty() && resized.annotations.empty();
  result.sample = std::move(resized);
  return result;
}

}  // namespace detkit
