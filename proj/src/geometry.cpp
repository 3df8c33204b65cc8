#include "detkit/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "detkit/error.hpp"

namespace detkit {

bool is_valid(const BoxNorm& b) {
  return b.cx >= 0.0 && b.cx <= 1.0 && b.cy >= 0.0 && b.cy <= 1.0 && b.w > 0.0 && b.w <= 1.0 &&
         b.h > 0.0 && b.h <= 1.0;
}

BoxPixel norm_to_pixel(const BoxNorm& box, Size size) {
  const double sw = size.width;
  const double sh = size.height;
  return {(box.cx - box.w / 2.0) * sw, (box.cy - box.h / 2.0) * sh, box.w * sw, box.h * sh};
}

BoxNorm pixel_to_norm(const BoxPixel& box, Size size) {
  const double sw = size.width;
  const double sh = size.height;
  return {(box.x_min + box.width / 2.0) / sw, (box.y_min + box.height / 2.0) / sh, box.width / sw,
          box.height / sh};
}

BoxPixel intersect(const BoxPixel& a, const BoxPixel& b) {
  const double x0 = std::max(a.x_min, b.x_min);
  const double y0 = std::max(a.y_min, b.y_min);
  const double x1 = std::min(a.x_max(), b.x_max());
  const double y1 = std::min(a.y_max(), b.y_max());
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

namespace {

// Areas come from the same edge differences as the intersection, so a box
// against itself gives exactly 1.
double iou_edges(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1, double by1) {
  const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double ih = std::min(ay1, by1) - std::max(ay0, by0);
  if (!(iw > 0.0 && ih > 0.0)) return 0.0;
  const double inter = iw * ih;
  const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace

double iou(const BoxPixel& a, const BoxPixel& b) {
  return iou_edges(a.x_min, a.y_min, a.x_max(), a.y_max(), b.x_min, b.y_min, b.x_max(), b.y_max());
}

double iou(const BoxNorm& a, const BoxNorm& b) {
  return iou_edges(a.cx - a.w / 2.0, a.cy - a.h / 2.0, a.cx + a.w / 2.0, a.cy + a.h / 2.0, b.cx - b.w / 2.0,
                   b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0);
}

LetterboxTransform compute_letterbox(Size src, Size dst) {
  LetterboxTransform t;
  t.src = src;
  t.dst = dst;
  t.scale = std::min(static_cast<double>(dst.width) / src.width,
                     static_cast<double>(dst.height) / src.height);
  // The binding dimension is pinned to dst exactly so rounding can never
  // overshoot by a pixel.
  const int sw = std::clamp(static_cast<int>(std::lround(src.width * t.scale)), 1, dst.width);
  const int sh = std::clamp(static_cast<int>(std::lround(src.height * t.scale)), 1, dst.height);
  t.scaled = {sw, sh};
  t.pad_x = (dst.width - sw) / 2;
  t.pad_y = (dst.height - sh) / 2;
  return t;
}

BoxPixel apply_letterbox(const LetterboxTransform& t, const BoxPixel& box, Direction direction) {
  if (direction == Direction::kForward) {
    return {box.x_min * t.scale + t.pad_x, box.y_min * t.scale + t.pad_y, box.width * t.scale,
            box.height * t.scale};
  }
  const BoxPixel content{static_cast<double>(t.pad_x), static_cast<double>(t.pad_y),
                         static_cast<double>(t.scaled.width), static_cast<double>(t.scaled.height)};
  if (intersect(box, content).area() <= 0.0) {
    throw DegenerateBoxError("letterbox inverse: box lies entirely in the padding");
  }
  return {(box.x_min - t.pad_x) / t.scale, (box.y_min - t.pad_y) / t.scale, box.width / t.scale,
          box.height / t.scale};
}

SinCos sincos_degrees(double angle_deg) {
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a == 0.0) return {0.0, 1.0};
  if (a == 90.0) return {1.0, 0.0};
  if (a == 180.0) return {0.0, -1.0};
  if (a == 270.0) return {-1.0, 0.0};
  const double rad = a * std::numbers::pi / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

BoxPixel rotated_aabb_unclipped(const BoxPixel& box, double angle_deg, Size size) {
  const SinCos r = sincos_degrees(angle_deg);
  const double ox = size.width / 2.0;
  const double oy = size.height / 2.0;
  const std::array<std::array<double, 2>, 4> corners{{{box.x_min, box.y_min},
                                                      {box.x_max(), box.y_min},
                                                      {box.x_min, box.y_max()},
                                                      {box.x_max(), box.y_max()}}};
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& [x, y] : corners) {
    const double dx = x - ox;
    const double dy = y - oy;
    const double rx = ox + dx * r.cos - dy * r.sin;
    const double ry = oy + dx * r.sin + dy * r.cos;
    x0 = std::min(x0, rx);
    y0 = std::min(y0, ry);
    x1 = std::max(x1, rx);
    y1 = std::max(y1, ry);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

std::optional<BoxNorm> rotated_aabb(const BoxNorm& box, double angle_deg, Size size) {
  const SinCos r = sincos_degrees(angle_deg);
  if (r.sin == 0.0 && r.cos == 1.0) return box;
  const BoxPixel rotated = rotated_aabb_unclipped(norm_to_pixel(box, size), angle_deg, size);
  const BoxPixel frame{0.0, 0.0, static_cast<double>(size.width), static_cast<double>(size.height)};
  const BoxPixel clipped = intersect(rotated, frame);
  if (clipped.width <= 0.0 || clipped.height <= 0.0) return std::nullopt;
  BoxNorm out = pixel_to_norm(clipped, size);
  out.cx = std::clamp(out.cx, 0.0, 1.0);
  out.cy = std::clamp(out.cy, 0.0, 1.0);
  out.w = std::min(out.w, 1.0);
  out.h = std::min(out.h, 1.0);
  if (!is_valid(out)) return std::nullopt;
  return out;
}

}  // namespace detkit
