#pragma once

#include <optional>

namespace detkit {

/// Image dimensions in pixels.
struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
};

/// Normalized center-format box (YOLO convention). All fields are fractions
/// of the image dimensions.
struct BoxNorm {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoxNorm&, const BoxNorm&) = default;
};

/// Top-left anchored box in pixel units. Real-valued; no rounding is applied
/// by any conversion.
struct BoxPixel {
  double x_min = 0.0;
  double y_min = 0.0;
  double width = 0.0;
  double height = 0.0;

  double x_max() const { return x_min + width; }
  double y_max() const { return y_min + height; }
  double area() const { return width * height; }

  friend bool operator==(const BoxPixel&, const BoxPixel&) = default;
};

/// 0 <= cx,cy <= 1 and 0 < w,h <= 1. NaN fails.
bool is_valid(const BoxNorm& box);

BoxPixel norm_to_pixel(const BoxNorm& box, Size size);
BoxNorm pixel_to_norm(const BoxPixel& box, Size size);

/// Intersection-over-union in continuous coordinates; 0 for disjoint or
/// zero-area inputs.
double iou(const BoxPixel& a, const BoxPixel& b);

/// IoU of two normalized boxes. Equal to the pixel-space IoU for any image
/// size since both axes scale uniformly.
double iou(const BoxNorm& a, const BoxNorm& b);

/// Intersection of two boxes; width/height are zero when they do not overlap.
BoxPixel intersect(const BoxPixel& a, const BoxPixel& b);

/// Aspect-preserving resize of `src` into `dst` with centered padding.
/// Odd padding remainders go to the right/bottom edge.
struct LetterboxTransform {
  double scale = 1.0;
  int pad_x = 0;
  int pad_y = 0;
  Size src;
  Size dst;
  Size scaled;  ///< content size inside dst: round(src * scale)
};

LetterboxTransform compute_letterbox(Size src, Size dst);

enum class Direction { kForward, kInverse };

/// Maps a box between source space and letterboxed space. The inverse throws
/// DegenerateBoxError if the box has no area inside the content region.
BoxPixel apply_letterbox(const LetterboxTransform& t, const BoxPixel& box, Direction direction);

/// Sine and cosine of an angle in degrees, exact at multiples of 90.
struct SinCos {
  double sin = 0.0;
  double cos = 1.0;
};
SinCos sincos_degrees(double angle_deg);

/// Rotates `box` by `angle_deg` about the image center in pixel space and
/// returns the axis-aligned box enclosing the rotated corners, clipped to
/// the image. Positive angles rotate from +x towards +y (clockwise on
/// screen). std::nullopt means the clipped box is degenerate and the label
/// must be dropped. A zero rotation returns `box` unchanged.
std::optional<BoxNorm> rotated_aabb(const BoxNorm& box, double angle_deg, Size size);

/// Same enclosure without clipping, for callers that need the raw extent.
BoxPixel rotated_aabb_unclipped(const BoxPixel& box, double angle_deg, Size size);

}  // namespace detkit
