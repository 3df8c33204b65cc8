#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detkit/formats.hpp"

namespace detkit {

/// Anchor priors in grid-cell units.
class AnchorSet {
 public:
  /// Throws RangeError when empty or when any prior is not positive.
  explicit AnchorSet(std::vector<Anchor> priors);

  std::size_t size() const { return priors_.size(); }
  const Anchor& operator[](std::size_t k) const { return priors_[k]; }
  const std::vector<Anchor>& priors() const { return priors_; }

 private:
  std::vector<Anchor> priors_;
};

/// Raw detector output, layout [cell_y][cell_x][anchor][tx ty tw th to logits...].
class RawTensor {
 public:
  RawTensor(int grid, int anchors, int classes);
  /// Throws FormatError if `values` does not hold grid*grid*anchors*(5+classes) reals.
  RawTensor(int grid, int anchors, int classes, std::vector<float> values);

  int grid() const { return grid_; }
  int anchors() const { return anchors_; }
  int classes() const { return classes_; }
  int slot_width() const { return 5 + classes_; }

  std::span<float> slot(int cell_y, int cell_x, int anchor);
  std::span<const float> slot(int cell_y, int cell_x, int anchor) const;

  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const RawTensor&, const RawTensor&) = default;

 private:
  std::size_t offset(int cell_y, int cell_x, int anchor) const;

  int grid_;
  int anchors_;
  int classes_;
  std::vector<float> values_;
};

struct TargetSlot {
  bool object = false;
  int class_id = 0;
  BoxNorm box;
};

/// Training targets with the same grid/anchor geometry as RawTensor.
struct TargetTensor {
  int grid = 0;
  int anchors = 0;
  int classes = 0;
  std::vector<TargetSlot> slots;  ///< [cell_y][cell_x][anchor]

  const TargetSlot& at(int cell_y, int cell_x, int anchor) const {
    return slots[(static_cast<std::size_t>(cell_y) * grid + cell_x) * anchors + anchor];
  }
  TargetSlot& at(int cell_y, int cell_x, int anchor) {
    return slots[(static_cast<std::size_t>(cell_y) * grid + cell_x) * anchors + anchor];
  }
  std::size_t object_count() const;
};

struct EncodeResult {
  TargetTensor targets;
  std::size_t collisions = 0;
};

struct Detection {
  int class_id = 0;
  double score = 0.0;
  BoxNorm box;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// (classes + 5) * anchors.
int expected_filter_count(int classes, int anchors);

/// IoU of two boxes sharing a center; the anchor-matching measure.
double shape_iou(double w1, double h1, double w2, double h2);

/// Assigns each label to the cell containing its center and to the prior
/// with the highest shape IoU. When two labels land on the same slot the
/// larger one wins and the collision is counted.
EncodeResult encode_targets(std::span<const Annotation> annotations, int grid, const AnchorSet& anchors,
                            int classes);

/// Inverts the decode equations so that decoding the result reproduces the
/// targets: objects get objectness logit +`confidence_logit` and the true
/// class logit +`confidence_logit`; empty slots get -`confidence_logit`.
RawTensor targets_to_raw(const TargetTensor& targets, const AnchorSet& anchors,
                         float confidence_logit = 20.0f);

/// Emits one Detection per (slot, class) whose objectness * softmax class
/// probability is >= `class_threshold`. Box extents are capped at 1.
/// Throws FormatError on a dimension mismatch and RangeError when the
/// threshold is outside [0, 1].
std::vector<Detection> decode_tensor(const RawTensor& raw, const AnchorSet& anchors, double class_threshold);

/// Strict weak order used everywhere detections are ranked: score
/// descending, then cx, cy, w, h, class ascending.
bool detection_rank_less(const Detection& a, const Detection& b);

/// Greedy per-class suppression of boxes with IoU > `iou_threshold` against a
/// kept box of the same class. Output is ranked by detection_rank_less.
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold);

/// ASCII header `S B C\n` then little-endian float32 payload.
std::string write_tensor(const RawTensor& tensor);
RawTensor read_tensor(std::string_view bytes);

}  // namespace detkit
