#include "detkit/formats.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_set>

#include "detkit/error.hpp"
#include "text_util.hpp"

namespace detkit {

using detail::parse_number;
using detail::trim;

ClassList::ClassList(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ParseError("class list is empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ParseError("empty class name");
    if (!seen.insert(n).second) throw ParseError("duplicate class name '" + n + "'");
  }
}

std::optional<int> ClassList::id_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  if (text.empty()) return lines;
  for (auto line : detail::split_char(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

Annotation parse_label_line(std::string_view line, int class_count, std::size_t line_no) {
  const auto fields = detail::split_fields(line);
  if (fields.size() != 5) {
    throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), line_no);
  }
  const auto class_id = parse_number<int>(fields[0]);
  if (!class_id) throw ParseError("class id '" + std::string(fields[0]) + "' is not an integer", line_no);
  double coords[4];
  for (int i = 0; i < 4; ++i) {
    const auto v = parse_number<double>(fields[i + 1]);
    if (!v) throw ParseError("'" + std::string(fields[i + 1]) + "' is not a number", line_no);
    coords[i] = *v;
  }
  if (*class_id < 0 || *class_id >= class_count) {
    throw RangeError("class id " + std::to_string(*class_id) + " outside [0, " +
                         std::to_string(class_count) + ")",
                     line_no);
  }
  const Annotation a{*class_id, {coords[0], coords[1], coords[2], coords[3]}};
  if (!is_valid(a.box)) throw RangeError("box coordinates out of range", line_no);
  return a;
}

std::vector<Annotation> parse_label_file(std::string_view text, int class_count) {
  std::vector<Annotation> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    out.push_back(parse_label_line(lines[i], class_count, i + 1));
  }
  return out;
}

std::string serialize_label_file(const std::vector<Annotation>& annotations) {
  std::string out;
  char buf[128];
  for (const auto& a : annotations) {
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", a.class_id, a.box.cx, a.box.cy,
                  a.box.w, a.box.h);
    out += buf;
  }
  return out;
}

ClassList parse_class_names(std::string_view text) {
  std::vector<std::string> names;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (!line.empty()) names.emplace_back(line);
  }
  return ClassList(std::move(names));
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::set<std::string, std::less<>> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto path = trim(lines[i]);
    if (path.empty()) continue;
    if (!seen.emplace(path).second) {
      throw ParseError("duplicate manifest entry '" + std::string(path) + "'", i + 1);
    }
    m.entries.emplace_back(path);
  }
  return m;
}

std::string serialize_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e;
    out += '\n';
  }
  return out;
}

namespace {

std::string normalize_key(std::string_view raw) {
  std::string key;
  bool pending_sep = false;
  for (char c : trim(raw)) {
    if (detail::is_space(c)) {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !key.empty()) key += '_';
    pending_sep = false;
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return key;
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!detail::is_space(c)) out += c;
  }
  return out;
}

struct ConfigLine {
  std::string value;
  std::size_t line = 0;
};

[[noreturn]] void bad_value(const std::string& key, const ConfigLine& v) {
  throw ParseError("cannot parse value '" + v.value + "' for key '" + key + "'", v.line);
}

int as_int(const std::string& key, const ConfigLine& v) {
  const auto n = parse_number<int>(v.value);
  if (!n) bad_value(key, v);
  return *n;
}

double as_real(const std::string& key, const ConfigLine& v) {
  const auto n = parse_number<double>(v.value);
  if (!n || !std::isfinite(*n)) bad_value(key, v);
  return *n;
}

template <typename T>
std::vector<T> as_list(const std::string& key, const ConfigLine& v) {
  std::vector<T> out;
  for (auto item : detail::split_char(v.value, ',')) {
    const auto n = parse_number<T>(item);
    if (!n) bad_value(key, v);
    out.push_back(*n);
  }
  return out;
}

}  // namespace

ParsedConfig parse_net_config(std::string_view text) {
  static const std::set<std::string, std::less<>> kKnown{
      "width", "height",   "channels",      "classes", "anchors",    "num",
      "filters", "batch",  "subdivisions",  "momentum", "decay",     "learning_rate",
      "steps", "saturation", "exposure",    "hue",     "angle"};

  std::map<std::string, ConfigLine, std::less<>> values;
  ParsedConfig parsed;
  std::set<std::string> warned;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      parsed.warnings.push_back("line " + std::to_string(i + 1) + ": ignored, no '='");
      continue;
    }
    const std::string key = normalize_key(line.substr(0, eq));
    if (!kKnown.contains(key)) {
      if (warned.insert(key).second) parsed.warnings.push_back("unknown key '" + key + "' ignored");
      continue;
    }
    values[key] = {strip_spaces(line.substr(eq + 1)), i + 1};
  }

  for (const char* required : {"width", "height", "classes", "filters"}) {
    if (!values.contains(required)) {
      throw ParseError(std::string("missing required key '") + required + "'");
    }
  }

  NetConfig& cfg = parsed.config;
  for (const auto& [key, v] : values) {
    if (key == "width") cfg.width = as_int(key, v);
    else if (key == "height") cfg.height = as_int(key, v);
    else if (key == "channels") cfg.channels = as_int(key, v);
    else if (key == "classes") cfg.classes = as_int(key, v);
    else if (key == "num") cfg.num = as_int(key, v);
    else if (key == "filters") cfg.filters = as_int(key, v);
    else if (key == "batch") cfg.batch = as_int(key, v);
    else if (key == "subdivisions") cfg.subdivisions = as_int(key, v);
    else if (key == "momentum") cfg.momentum = as_real(key, v);
    else if (key == "decay") cfg.decay = as_real(key, v);
    else if (key == "learning_rate") cfg.learning_rate = as_real(key, v);
    else if (key == "saturation") cfg.saturation = as_real(key, v);
    else if (key == "exposure") cfg.exposure = as_real(key, v);
    else if (key == "hue") cfg.hue = as_real(key, v);
    else if (key == "angle") cfg.angle = as_real(key, v);
    else if (key == "steps") cfg.steps = as_list<long long>(key, v);
    else if (key == "anchors") {
      const auto flat = as_list<double>(key, v);
      if (flat.empty() || flat.size() % 2 != 0) bad_value(key, v);
      cfg.anchors.clear();
      for (std::size_t k = 0; k < flat.size(); k += 2) cfg.anchors.push_back({flat[k], flat[k + 1]});
    }
  }
  return parsed;
}

ConfigReport validate_net_config(const NetConfig& cfg) {
  ConfigReport r;
  auto add = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };
  auto fmt = [](double v) { return detail::format_shortest(v); };

  if (cfg.width <= 0 || cfg.width % 32 != 0) {
    add("width " + std::to_string(cfg.width) + " is not a positive multiple of 32");
  }
  if (cfg.height <= 0 || cfg.height % 32 != 0) {
    add("height " + std::to_string(cfg.height) + " is not a positive multiple of 32");
  }
  if (cfg.channels != 3) add("channels " + std::to_string(cfg.channels) + " != 3");
  if (cfg.classes < 1) add("classes " + std::to_string(cfg.classes) + " < 1");
  if (cfg.anchors.empty()) add("no anchors");
  for (const auto& a : cfg.anchors) {
    if (!(a.pw > 0.0) || !(a.ph > 0.0)) add("anchor (" + fmt(a.pw) + "," + fmt(a.ph) + ") not positive");
  }
  if (cfg.num && *cfg.num != static_cast<int>(cfg.anchors.size())) {
    add("num " + std::to_string(*cfg.num) + " != anchor count " + std::to_string(cfg.anchors.size()));
  }
  if (cfg.classes >= 1 && !cfg.anchors.empty()) {
    const int expected = (cfg.classes + 5) * static_cast<int>(cfg.anchors.size());
    if (cfg.filters != expected) {
      add("filters " + std::to_string(cfg.filters) + " != " + std::to_string(expected) + " = (" +
          std::to_string(cfg.classes) + " + 5) x " + std::to_string(cfg.anchors.size()));
    }
  }
  if (cfg.batch < 1) add("batch " + std::to_string(cfg.batch) + " < 1");
  if (cfg.subdivisions < 1) {
    add("subdivisions " + std::to_string(cfg.subdivisions) + " < 1");
  } else if (cfg.batch >= 1 && cfg.batch % cfg.subdivisions != 0) {
    add("batch " + std::to_string(cfg.batch) + " not divisible by subdivisions " +
        std::to_string(cfg.subdivisions));
  }
  if (cfg.saturation < 1.0) add("saturation " + fmt(cfg.saturation) + " < 1");
  if (cfg.exposure < 1.0) add("exposure " + fmt(cfg.exposure) + " < 1");
  if (cfg.hue < 0.0 || cfg.hue > 0.5) add("hue " + fmt(cfg.hue) + " outside [0, 0.5]");
  if (cfg.angle < 0.0) add("angle " + fmt(cfg.angle) + " < 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) add("momentum " + fmt(cfg.momentum) + " outside [0, 1)");
  if (cfg.decay < 0.0) add("decay " + fmt(cfg.decay) + " < 0");
  if (cfg.learning_rate <= 0.0) add("learning_rate " + fmt(cfg.learning_rate) + " <= 0");
  for (long long s : cfg.steps) {
    if (s < 0) add("negative step " + std::to_string(s));
  }
  return r;
}

namespace {

// `<iter>: <loss>, <avg> avg...`
std::optional<LossRecord> match_log_line(std::string_view line) {
  line = trim(line);
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto iter_text = line.substr(0, colon);
  if (iter_text.empty() || iter_text.find_first_not_of("0123456789") != std::string_view::npos) {
    return std::nullopt;
  }
  const auto iteration = parse_number<long long>(iter_text);
  auto rest = line.substr(colon + 1);
  const auto comma = rest.find(',');
  if (!iteration || comma == std::string_view::npos) return std::nullopt;
  const auto loss = parse_number<double>(rest.substr(0, comma));
  rest = detail::trim(rest.substr(comma + 1));
  const auto space = rest.find_first_of(" \t");
  if (!loss || space == std::string_view::npos) return std::nullopt;
  const auto avg = parse_number<double>(rest.substr(0, space));
  const auto tail = trim(rest.substr(space));
  if (!avg || !tail.starts_with("avg")) return std::nullopt;
  if (tail.size() > 3 && !detail::is_space(tail[3]) && tail[3] != ',') return std::nullopt;
  if (!std::isfinite(*loss) || !std::isfinite(*avg) || *loss < 0.0 || *avg < 0.0) return std::nullopt;
  return LossRecord{*iteration, *loss, *avg};
}

}  // namespace

TrainingLog parse_training_log(std::string_view text) {
  TrainingLog log;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto rec = match_log_line(lines[i]);
    if (!rec) continue;
    if (!log.records.empty() && rec->iteration <= log.records.back().iteration) {
      log.warnings.push_back("line " + std::to_string(i + 1) + ": iteration " +
                             std::to_string(rec->iteration) + " does not increase (previous " +
                             std::to_string(log.records.back().iteration) + ")");
    }
    log.records.push_back(*rec);
  }
  return log;
}

std::string serialize_loss_csv(const std::vector<LossRecord>& records) {
  std::string out = "iteration,loss,avg_loss\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration);
    out += ',';
    out += detail::format_shortest(r.loss);
    out += ',';
    out += detail::format_shortest(r.avg_loss);
    out += '\n';
  }
  return out;
}

}  // namespace detkit
