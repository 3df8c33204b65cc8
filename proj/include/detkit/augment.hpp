#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "detkit/formats.hpp"
#include "detkit/image.hpp"

namespace detkit {

struct Hsv {
  double h = 0.0;  ///< [0, 1)
  double s = 0.0;  ///< [0, 1]
  double v = 0.0;  ///< [0, 1]
};

Hsv rgb_to_hsv(Rgb p);
Rgb hsv_to_rgb(Hsv p);

/// Color jitter for a single pixel.
Hsv jitter_hsv(Hsv p, double s_scale, double v_scale, double h_shift);

/// Per pixel: s' = clamp(s * s_scale), v' = clamp(v * v_scale),
/// h' = (h + h_shift) mod 1. Identity arguments return the input unchanged.
RasterImage hsv_jitter(const RasterImage& image, double s_scale, double v_scale, double h_shift);

struct Sample {
  RasterImage image;
  std::vector<Annotation> annotations;
};

/// Integral pixel rectangle.
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct TransformResult {
  Sample sample;
  std::size_t dropped = 0;  ///< annotations removed by the transform
};

/// Cuts `crop` out of the sample. Regions of the crop outside the image are
/// filled with kFillGray. Boxes keeping less than `min_box_retention` of
/// their area are dropped. Throws RangeError when the crop misses the image.
TransformResult random_crop(const Sample& sample, const PixelRect& crop, double min_box_retention);

/// Rotates about the image center keeping the canvas size. Labels become the
/// clipped axis-aligned hull of their rotated corners.
TransformResult rotate_sample(const Sample& sample, double angle_deg);

/// Normalized labels are unchanged by a resize.
Sample resize_sample(const Sample& sample, Size dst);

struct AugmentParams {
  double saturation = 1.5;
  double exposure = 1.5;
  double hue = 0.1;
  double max_angle_deg = 15.0;
  double crop_jitter = 0.2;
  double min_box_retention = 0.25;
  std::uint64_t seed = 0;
};

/// Throws RangeError when a field is outside its documented range.
void validate(const AugmentParams& params);

/// The random choices made for one augmented sample. The crop keeps the
/// image aspect ratio (up to integer rounding) so that resizing it back to
/// the input size scales both axes equally.
struct AugmentDraw {
  PixelRect crop;
  double angle_deg = 0.0;
  double s_scale = 1.0;
  double v_scale = 1.0;
  double h_shift = 0.0;
};

/// Draw order: left, right, top, bottom crop insets; angle; saturation scale
/// and its inversion coin; exposure scale and its coin; hue shift.
/// The crop shrinks by the tighter of the two axes' total insets and is
/// placed so the drawn left/top insets keep their share of the slack.
AugmentDraw draw_augmentation(const AugmentParams& params, std::uint64_t index, Size size);

struct AugmentResult {
  Sample sample;
  AugmentDraw draw;
  std::size_t dropped = 0;
  bool dropped_all = false;  ///< input had labels and none survived
};

/// rotate -> crop -> resize back to the input size -> HSV jitter. A pure
/// function of (sample, params, index).
AugmentResult augment_sample(const Sample& sample, const AugmentParams& params, std::uint64_t index);

}  // namespace detkit
