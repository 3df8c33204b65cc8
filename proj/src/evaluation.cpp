#include "detkit/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "detkit/error.hpp"

namespace detkit {

std::vector<MatchOutcome> match_detections(std::span<const Detection> detections,
                                           std::span<const Annotation> ground_truth, double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detection_rank_less(detections[a], detections[b]);
  });

  std::vector<bool> taken(ground_truth.size(), false);
  std::vector<MatchOutcome> out;
  out.reserve(detections.size());
  for (std::size_t idx : order) {
    const Detection& d = detections[idx];
    double best = -1.0;
    std::optional<std::size_t> best_gt;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(d.box, ground_truth[g].box);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    MatchOutcome m{idx, d.score, false, std::nullopt};
    if (best_gt && best >= iou_threshold) {
      taken[*best_gt] = true;
      m.true_positive = true;
      m.matched_gt = best_gt;
    }
    out.push_back(m);
  }
  return out;
}

std::vector<PrPoint> pr_curve(std::span<const MatchOutcome> ranked, std::size_t gt_count) {
  std::vector<PrPoint> points;
  points.reserve(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].true_positive) ++tp;
    const double recall = gt_count > 0 ? static_cast<double>(tp) / gt_count : 0.0;
    points.push_back({recall, static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return points;
}

namespace {

std::vector<MatchOutcome> ranked_copy(std::span<const MatchOutcome> outcomes) {
  std::vector<MatchOutcome> sorted(outcomes.begin(), outcomes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MatchOutcome& a, const MatchOutcome& b) { return a.score > b.score; });
  return sorted;
}

double envelope_area(const std::vector<PrPoint>& points) {
  // Suffix maxima of precision, then sum precision over each recall step.
  std::vector<double> envelope(points.size());
  double best = 0.0;
  for (std::size_t i = points.size(); i-- > 0;) {
    best = std::max(best, points[i].precision);
    envelope[i] = best;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ap += (points[i].recall - prev_recall) * envelope[i];
    prev_recall = points[i].recall;
  }
  return std::clamp(ap, 0.0, 1.0);
}

}  // namespace

std::optional<double> average_precision(std::span<const MatchOutcome> outcomes, std::size_t gt_count) {
  if (gt_count == 0) return std::nullopt;
  return envelope_area(pr_curve(ranked_copy(outcomes), gt_count));
}

std::optional<double> mean_average_precision(std::span<const double> aps) {
  if (aps.empty()) return std::nullopt;
  double sum = 0.0;
  for (double ap : aps) sum += ap;
  return sum / static_cast<double>(aps.size());
}

EvalReport evaluate(std::span<const ImageEval> images, int class_count, double iou_threshold) {
  if (class_count < 1) throw RangeError("class count must be positive");
  struct Pooled {
    MatchOutcome outcome;
    Detection detection;
    std::size_t image = 0;
  };
  std::vector<std::vector<Pooled>> pooled(class_count);
  std::vector<std::size_t> gt_counts(class_count, 0);

  for (std::size_t img = 0; img < images.size(); ++img) {
    const ImageEval& image = images[img];
    for (const auto& d : image.detections) {
      if (d.class_id < 0 || d.class_id >= class_count) {
        throw RangeError("detection class id " + std::to_string(d.class_id) + " outside [0, " +
                         std::to_string(class_count) + ")");
      }
    }
    for (int c = 0; c < class_count; ++c) {
      std::vector<Detection> dets;
      std::vector<Annotation> gts;
      for (const auto& d : image.detections) {
        if (d.class_id == c) dets.push_back(d);
      }
      for (const auto& g : image.ground_truth) {
        if (g.class_id == c) gts.push_back(g);
      }
      gt_counts[c] += gts.size();
      for (const auto& m : match_detections(dets, gts, iou_threshold)) {
        pooled[c].push_back({m, dets[m.detection_index], img});
      }
    }
  }

  EvalReport report;
  std::vector<double> aps;
  for (int c = 0; c < class_count; ++c) {
    auto& items = pooled[c];
    // Items from one image are already in visit order; the stable sort keeps
    // that order among identical detections.
    std::stable_sort(items.begin(), items.end(), [](const Pooled& a, const Pooled& b) {
      if (detection_rank_less(a.detection, b.detection)) return true;
      if (detection_rank_less(b.detection, a.detection)) return false;
      return a.image < b.image;
    });
    std::vector<MatchOutcome> ranked;
    ranked.reserve(items.size());
    for (const auto& p : items) ranked.push_back(p.outcome);

    ClassReport cr;
    cr.gt_count = gt_counts[c];
    cr.tp = static_cast<std::size_t>(std::count_if(ranked.begin(), ranked.end(),
                                                   [](const MatchOutcome& m) { return m.true_positive; }));
    cr.fp = ranked.size() - cr.tp;
    cr.pr_points = pr_curve(ranked, cr.gt_count);
    cr.ap = average_precision(ranked, cr.gt_count);
    if (cr.ap) aps.push_back(*cr.ap);
    report.per_class.emplace(c, std::move(cr));
  }
  report.map = mean_average_precision(aps);
  return report;
}

}  // namespace detkit
