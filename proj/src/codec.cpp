#include "detkit/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

#include "detkit/error.hpp"
#include "text_util.hpp"

namespace detkit {

AnchorSet::AnchorSet(std::vector<Anchor> priors) : priors_(std::move(priors)) {
  if (priors_.empty()) throw RangeError("anchor set is empty");
  for (const auto& a : priors_) {
    if (!(a.pw > 0.0) || !(a.ph > 0.0)) throw RangeError("anchor priors must be positive");
  }
}

RawTensor::RawTensor(int grid, int anchors, int classes)
    : RawTensor(grid, anchors, classes,
                std::vector<float>(grid > 0 && anchors > 0 && classes > 0
                                       ? static_cast<std::size_t>(grid) * grid * anchors * (5 + classes)
                                       : 0)) {}

RawTensor::RawTensor(int grid, int anchors, int classes, std::vector<float> values)
    : grid_(grid), anchors_(anchors), classes_(classes), values_(std::move(values)) {
  if (grid <= 0 || anchors <= 0 || classes <= 0) throw FormatError("tensor dimensions must be positive");
  const std::size_t expected = static_cast<std::size_t>(grid) * grid * anchors * (5 + classes);
  if (values_.size() != expected) {
    throw FormatError("tensor holds " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(expected));
  }
}

std::size_t RawTensor::offset(int cell_y, int cell_x, int anchor) const {
  return ((static_cast<std::size_t>(cell_y) * grid_ + cell_x) * anchors_ + anchor) * slot_width();
}

std::span<float> RawTensor::slot(int cell_y, int cell_x, int anchor) {
  return {values_.data() + offset(cell_y, cell_x, anchor), static_cast<std::size_t>(slot_width())};
}

std::span<const float> RawTensor::slot(int cell_y, int cell_x, int anchor) const {
  return {values_.data() + offset(cell_y, cell_x, anchor), static_cast<std::size_t>(slot_width())};
}

std::size_t TargetTensor::object_count() const {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const TargetSlot& s) { return s.object; }));
}

int expected_filter_count(int classes, int anchors) { return (classes + 5) * anchors; }

double shape_iou(double w1, double h1, double w2, double h2) {
  const double inter = std::min(w1, w2) * std::min(h1, h2);
  const double uni = w1 * h1 + w2 * h2 - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

int cell_of(double center, int grid) {
  return std::clamp(static_cast<int>(std::floor(center * grid)), 0, grid - 1);
}

}  // namespace

EncodeResult encode_targets(std::span<const Annotation> annotations, int grid, const AnchorSet& anchors,
                            int classes) {
  if (grid <= 0 || classes <= 0) throw RangeError("grid and class count must be positive");
  EncodeResult result;
  TargetTensor& t = result.targets;
  t.grid = grid;
  t.anchors = static_cast<int>(anchors.size());
  t.classes = classes;
  t.slots.assign(static_cast<std::size_t>(grid) * grid * anchors.size(), {});

  for (const auto& a : annotations) {
    if (a.class_id < 0 || a.class_id >= classes) {
      throw RangeError("class id " + std::to_string(a.class_id) + " outside [0, " + std::to_string(classes) + ")");
    }
    if (!is_valid(a.box)) throw RangeError("annotation box out of range");
    const int cx = cell_of(a.box.cx, grid);
    const int cy = cell_of(a.box.cy, grid);
    int best = 0;
    double best_iou = -1.0;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      const double v = shape_iou(a.box.w * grid, a.box.h * grid, anchors[k].pw, anchors[k].ph);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(k);
      }
    }
    TargetSlot& slot = t.at(cy, cx, best);
    if (slot.object) {
      ++result.collisions;
      if (a.box.w * a.box.h <= slot.box.w * slot.box.h) continue;
    }
    slot = {true, a.class_id, a.box};
  }
  return result;
}

RawTensor targets_to_raw(const TargetTensor& targets, const AnchorSet& anchors, float confidence_logit) {
  if (static_cast<int>(anchors.size()) != targets.anchors) throw FormatError("anchor count mismatch");
  RawTensor raw(targets.grid, targets.anchors, targets.classes);
  const double s = targets.grid;
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  for (int i = 0; i < targets.grid; ++i) {
    for (int j = 0; j < targets.grid; ++j) {
      for (int k = 0; k < targets.anchors; ++k) {
        const TargetSlot& t = targets.at(i, j, k);
        auto v = raw.slot(i, j, k);
        if (!t.object) {
          v[4] = -confidence_logit;
          continue;
        }
        v[0] = static_cast<float>(logit(t.box.cx * s - j));
        v[1] = static_cast<float>(logit(t.box.cy * s - i));
        v[2] = static_cast<float>(std::log(t.box.w * s / anchors[k].pw));
        v[3] = static_cast<float>(std::log(t.box.h * s / anchors[k].ph));
        v[4] = confidence_logit;
        v[5 + t.class_id] = confidence_logit;
      }
    }
  }
  return raw;
}

std::vector<Detection> decode_tensor(const RawTensor& raw, const AnchorSet& anchors, double class_threshold) {
  if (!(class_threshold >= 0.0 && class_threshold <= 1.0)) {
    throw RangeError("class threshold must be in [0, 1]");
  }
  if (static_cast<int>(anchors.size()) != raw.anchors()) {
    throw FormatError("tensor has " + std::to_string(raw.anchors()) + " anchors per cell, anchor set has " +
                      std::to_string(anchors.size()));
  }
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const int s = raw.grid();
  const int c = raw.classes();
  std::vector<double> probs(c);
  std::vector<Detection> out;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      for (int k = 0; k < raw.anchors(); ++k) {
        const auto v = raw.slot(i, j, k);
        const double objectness = sigmoid(v[4]);
        if (objectness < class_threshold) continue;
        double max_logit = v[5];
        for (int q = 1; q < c; ++q) max_logit = std::max<double>(max_logit, v[5 + q]);
        double sum = 0.0;
        for (int q = 0; q < c; ++q) sum += probs[q] = std::exp(v[5 + q] - max_logit);
        const BoxNorm box{(j + sigmoid(v[0])) / s, (i + sigmoid(v[1])) / s,
                          std::min(1.0, anchors[k].pw * std::exp(double(v[2])) / s),
                          std::min(1.0, anchors[k].ph * std::exp(double(v[3])) / s)};
        if (!(box.w > 0.0) || !(box.h > 0.0)) continue;
        for (int q = 0; q < c; ++q) {
          const double score = std::clamp(objectness * probs[q] / sum, 0.0, 1.0);
          if (score >= class_threshold) out.push_back({q, score, box});
        }
      }
    }
  }
  return out;
}

bool detection_rank_less(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.box.cx, a.box.cy, a.box.w, a.box.h, a.class_id) <
         std::tie(b.box.cx, b.box.cy, b.box.w, b.box.h, b.class_id);
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
  std::sort(detections.begin(), detections.end(), detection_rank_less);
  std::vector<Detection> kept;
  for (const auto& d : detections) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == d.class_id && iou(k.box, d.box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::string write_tensor(const RawTensor& tensor) {
  std::string out = std::to_string(tensor.grid()) + " " + std::to_string(tensor.anchors()) + " " +
                    std::to_string(tensor.classes()) + "\n";
  out.reserve(out.size() + tensor.values().size() * 4);
  for (float f : tensor.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return out;
}

RawTensor read_tensor(std::string_view bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos || newline > 64) throw FormatError("tensor header missing");
  const auto fields = detail::split_fields(bytes.substr(0, newline));
  if (fields.size() != 3) throw FormatError("tensor header must be 'S B C'");
  int dims[3];
  for (int i = 0; i < 3; ++i) {
    const auto n = detail::parse_number<int>(fields[i]);
    if (!n || *n <= 0) throw FormatError("bad tensor header field '" + std::string(fields[i]) + "'");
    dims[i] = *n;
  }
  const auto payload = bytes.substr(newline + 1);
  const std::size_t count = static_cast<std::size_t>(dims[0]) * dims[0] * dims[1] * (5 + dims[2]);
  if (payload.size() != count * 4) {
    throw FormatError("tensor payload is " + std::to_string(payload.size()) + " bytes, header implies " +
                      std::to_string(count * 4));
  }
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[i * 4 + b])) << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
  return RawTensor(dims[0], dims[1], dims[2], std::move(values));
}

}  // namespace detkit
