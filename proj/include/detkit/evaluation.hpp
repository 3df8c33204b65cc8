#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detkit/codec.hpp"
#include "detkit/formats.hpp"

namespace detkit {

struct MatchOutcome {
  std::size_t detection_index = 0;
  double score = 0.0;
  bool true_positive = false;
  std::optional<std::size_t> matched_gt;
};

/// VOC-style greedy matching for one image and one class. Detections are
/// visited in rank order (detection_rank_less); each claims the unmatched
/// ground truth it overlaps most if that IoU reaches `iou_threshold`.
/// Outcomes are returned in visit order.
std::vector<MatchOutcome> match_detections(std::span<const Detection> detections,
                                           std::span<const Annotation> ground_truth, double iou_threshold);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// Cumulative precision/recall after each outcome, in the given order.
std::vector<PrPoint> pr_curve(std::span<const MatchOutcome> ranked_outcomes, std::size_t gt_count);

/// All-point interpolated AP: sum over recall steps of the step width times
/// the best precision at that recall or beyond. Outcomes are stably sorted
/// by descending score first. std::nullopt when gt_count is 0.
std::optional<double> average_precision(std::span<const MatchOutcome> outcomes, std::size_t gt_count);

struct ClassReport {
  std::optional<double> ap;
  std::size_t gt_count = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::vector<PrPoint> pr_points;
};

struct EvalReport {
  std::map<int, ClassReport> per_class;
  std::optional<double> map;  ///< mean AP over classes present in ground truth
};

struct ImageEval {
  std::vector<Detection> detections;
  std::vector<Annotation> ground_truth;
};

/// Mean of the given APs; std::nullopt for an empty list.
std::optional<double> mean_average_precision(std::span<const double> aps);

/// Pools detections per class across images, then computes AP per class and
/// their mean. Throws RangeError for a class id outside [0, class_count).
EvalReport evaluate(std::span<const ImageEval> images, int class_count, double iou_threshold = 0.5);

}  // namespace detkit
