#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detkit/geometry.hpp"

namespace detkit {

/// Ordered, unique class names. The position of a name is its class id.
class ClassList {
 public:
  /// Throws ParseError on an empty list or a duplicate name.
  explicit ClassList(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> id_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

struct Annotation {
  int class_id = 0;
  BoxNorm box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Manifest {
  std::vector<std::string> entries;
};

struct Anchor {
  double pw = 0.0;
  double ph = 0.0;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// The [net]/[region] scalar keys of a darknet-style config.
struct NetConfig {
  int width = 0;
  int height = 0;
  int channels = 3;
  int classes = 0;
  std::vector<Anchor> anchors{{1.08, 1.19}, {3.42, 4.41}, {16.62, 10.52}};
  std::optional<int> num;  ///< darknet's explicit anchor count, if given
  int filters = 0;
  int batch = 1;
  int subdivisions = 1;
  double momentum = 0.9;
  double decay = 0.0005;
  double learning_rate = 0.001;
  std::vector<long long> steps;
  double saturation = 1.0;
  double exposure = 1.0;
  double hue = 0.0;
  double angle = 0.0;
};

struct ParsedConfig {
  NetConfig config;
  std::vector<std::string> warnings;
};

struct ConfigReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

struct LossRecord {
  long long iteration = 0;
  double loss = 0.0;
  double avg_loss = 0.0;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

struct TrainingLog {
  std::vector<LossRecord> records;
  std::vector<std::string> warnings;
};

/// One `<class_id> <cx> <cy> <w> <h>` line. Throws ParseError for grammar
/// problems and RangeError for out-of-range class ids or coordinates.
Annotation parse_label_line(std::string_view line, int class_count, std::size_t line_no = 0);

/// Blank lines are skipped; CRLF is accepted.
std::vector<Annotation> parse_label_file(std::string_view text, int class_count);

/// Six decimals per real, LF line endings.
std::string serialize_label_file(const std::vector<Annotation>& annotations);

ClassList parse_class_names(std::string_view text);

Manifest parse_manifest(std::string_view text);
std::string serialize_manifest(const Manifest& manifest);

/// Reads `key=value` lines. Section headers and `#`/`;` comments are
/// skipped; repeated keys keep the last value, so a full darknet cfg yields
/// the final conv layer's `filters` and the region layer's anchors/classes.
/// Unknown keys produce one warning each.
ParsedConfig parse_net_config(std::string_view text);

/// Lists every violated constraint; an empty list means the config is usable.
ConfigReport validate_net_config(const NetConfig& cfg);

/// Darknet-style progress lines `<iter>: <loss>, <avg> avg...`; anything
/// else is skipped. Non-increasing iterations are kept with a warning.
TrainingLog parse_training_log(std::string_view text);

/// `iteration,loss,avg_loss` header plus one row per record.
std::string serialize_loss_csv(const std::vector<LossRecord>& records);

/// Splits on LF, dropping a trailing CR from each line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace detkit
