#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "../text_util.hpp"
#include "detkit/cli.hpp"
#include "detkit/error.hpp"
#include "detkit/image.hpp"

namespace detkit::cli {

using json = nlohmann::ordered_json;

namespace {

ClassList load_names(const fs::path& path) { return parse_class_names(read_text_file(path)); }

Manifest load_manifest(const fs::path& path) { return parse_manifest(read_text_file(path)); }

/// Manifest entries are relative to the manifest's directory.
fs::path resolve_entry(const fs::path& manifest, const std::string& entry) {
  const fs::path p(entry);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err) {
  ValidationReport report;
  try {
    const ClassList classes = load_names(opt.names);
    report = validate_dataset(opt.root, classes);
  } catch (const Error& e) {
    err << "validate: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "validate: " << e.what() << "\n";
    return kUsage;
  }
  out << to_json(report);
  return report.clean() ? kOk : kDataProblem;
}

// ---------------------------------------------------------------------------

int cmd_split(const SplitOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Manifest manifest = load_manifest(opt.manifest);
    std::vector<int> strata;
    strata.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
      const fs::path label = label_path_for(resolve_entry(opt.manifest, entry));
      strata.push_back(fs::exists(label) ? majority_class(read_text_file(label)) : -1);
    }
    const SplitResult split = split_manifest(manifest, strata, opt.spec);
    fs::create_directories(opt.out_dir);
    write_file_atomic(opt.out_dir / "train.txt", serialize_manifest(split.train));
    write_file_atomic(opt.out_dir / "val.txt", serialize_manifest(split.val));
    write_file_atomic(opt.out_dir / "test.txt", serialize_manifest(split.test));
    json j;
    j["train"] = split.train.entries.size();
    j["val"] = split.val.entries.size();
    j["test"] = split.test.entries.size();
    out << j.dump() << "\n";
  } catch (const Error& e) {
    err << "split: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "split: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

namespace {

struct ImageJob {
  std::vector<std::string> outputs;
  std::size_t dropped = 0;
  std::vector<std::string> dropped_all;
  std::string failure;
};

void augment_one(const AugmentOptions& opt, const fs::path& image_path, int class_count, std::size_t ordinal,
                 ImageJob& job) {
  try {
    const fs::path label_path = label_path_for(image_path);
    Sample sample{read_png(image_path), parse_label_file(read_text_file(label_path), class_count)};
    const std::string stem = image_path.stem().string();
    for (std::size_t c = 0; c < opt.copies; ++c) {
      const std::uint64_t index = ordinal * opt.copies + c;
      const AugmentResult r = augment_sample(sample, opt.params, index);
      const std::string name = stem + "_aug" + std::to_string(index);
      const auto png = encode_png(r.sample.image);
      write_file_atomic(opt.out_dir / (name + ".png"),
                        std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
      write_file_atomic(opt.out_dir / (name + ".txt"), serialize_label_file(r.sample.annotations));
      job.outputs.push_back(name + ".png");
      job.dropped += r.dropped;
      if (r.dropped_all) job.dropped_all.push_back(name + ".png");
    }
  } catch (const std::exception& e) {
    job.failure = image_path.string() + ": " + e.what();
  }
}

}  // namespace

int cmd_augment(const AugmentOptions& opt, std::ostream& out, std::ostream& err) {
  ClassList classes({"_"});
  Manifest manifest;
  try {
    validate(opt.params);
    if (opt.copies == 0) throw RangeError("copies must be >= 1");
    classes = load_names(opt.names);
    manifest = load_manifest(opt.manifest);
    fs::create_directories(opt.out_dir);
  } catch (const std::exception& e) {
    err << "augment: " << e.what() << "\n";
    return kUsage;
  }

  const std::size_t n = manifest.entries.size();
  std::vector<ImageJob> jobs(n);
  const unsigned workers = std::min<unsigned>(resolve_threads(opt.threads), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      augment_one(opt, resolve_entry(opt.manifest, manifest.entries[i]), static_cast<int>(classes.size()), i,
                  jobs[i]);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  json summary;
  std::size_t outputs = 0;
  std::size_t dropped = 0;
  json dropped_all = json::array();
  json failures = json::array();
  Manifest produced;
  for (const auto& job : jobs) {
    outputs += job.outputs.size();
    dropped += job.dropped;
    for (const auto& d : job.dropped_all) dropped_all.push_back(d);
    if (!job.failure.empty()) failures.push_back(job.failure);
    produced.entries.insert(produced.entries.end(), job.outputs.begin(), job.outputs.end());
  }
  try {
    write_file_atomic(opt.out_dir / "augmented.txt", serialize_manifest(produced));
  } catch (const Error& e) {
    failures.push_back(e.what());
  }
  summary["inputs"] = n;
  summary["outputs"] = outputs;
  summary["boxes_dropped"] = dropped;
  summary["dropped_all"] = dropped_all;
  summary["failures"] = failures;
  out << summary.dump(2) << "\n";
  for (const auto& f : failures) err << "augment: " << f.get<std::string>() << "\n";
  return failures.empty() ? kOk : kDataProblem;
}

// ---------------------------------------------------------------------------

std::optional<Size> parse_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) return std::nullopt;
  const auto w = detail::parse_number<int>(text.substr(0, x));
  const auto h = detail::parse_number<int>(text.substr(x + 1));
  if (!w || !h || *w <= 0 || *h <= 0) return std::nullopt;
  return Size{*w, *h};
}

int cmd_letterbox(const LetterboxOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.dst.width <= 0 || opt.dst.height <= 0) throw RangeError("destination size must be positive");
    std::optional<RasterImage> image;
    Size src;
    if (opt.image) {
      image = read_png(*opt.image);
      src = image->size();
    } else if (opt.src) {
      src = *opt.src;
    } else {
      throw RangeError("either --src or --image is required");
    }
    if (src.width <= 0 || src.height <= 0) throw RangeError("source size must be positive");
    const LetterboxTransform t = compute_letterbox(src, opt.dst);
    json j;
    j["src"] = {src.width, src.height};
    j["dst"] = {t.dst.width, t.dst.height};
    j["scale"] = t.scale;
    j["scaled"] = {t.scaled.width, t.scaled.height};
    j["pad_x"] = t.pad_x;
    j["pad_y"] = t.pad_y;

    if (image && opt.out) {
      const auto png = encode_png(letterbox_image(*image, t));
      write_file_atomic(*opt.out, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
      const fs::path label = label_path_for(*opt.image);
      if (fs::exists(label)) {
        // Class ids are not range-checked here; only geometry changes.
        std::vector<Annotation> mapped;
        for (const auto& a : parse_label_file(read_text_file(label), 1 << 30)) {
          const BoxPixel moved = apply_letterbox(t, norm_to_pixel(a.box, src), Direction::kForward);
          mapped.push_back({a.class_id, pixel_to_norm(moved, t.dst)});
        }
        write_file_atomic(label_path_for(*opt.out), serialize_label_file(mapped));
        j["labels"] = mapped.size();
      }
    }
    out << j.dump() << "\n";
  } catch (const Error& e) {
    err << "letterbox: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

std::string detection_json_line(const ImageDetection& d, const ClassList* classes) {
  json j;
  j["image"] = d.image;
  j["class_id"] = d.detection.class_id;
  if (classes && d.detection.class_id >= 0 && static_cast<std::size_t>(d.detection.class_id) < classes->size()) {
    j["class"] = classes->name(static_cast<std::size_t>(d.detection.class_id));
  } else {
    j["class"] = std::to_string(d.detection.class_id);
  }
  j["score"] = d.detection.score;
  j["box"] = {d.detection.box.cx, d.detection.box.cy, d.detection.box.w, d.detection.box.h};
  return j.dump();
}

std::vector<ImageDetection> parse_detection_lines(std::string_view text) {
  std::vector<ImageDetection> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    try {
      const json j = json::parse(lines[i]);
      ImageDetection d;
      d.image = j.at("image").get<std::string>();
      d.detection.class_id = j.at("class_id").get<int>();
      d.detection.score = j.at("score").get<double>();
      const auto& box = j.at("box");
      if (!box.is_array() || box.size() != 4) throw ParseError("box must hold 4 numbers", i + 1);
      d.detection.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
      if (!(d.detection.score >= 0.0 && d.detection.score <= 1.0)) throw RangeError("score outside [0, 1]", i + 1);
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), i + 1);
    }
  }
  return out;
}

LoadedConfig load_config(const fs::path& path) {
  ParsedConfig parsed = parse_net_config(read_text_file(path));
  LoadedConfig loaded{parsed.config, std::move(parsed.warnings), validate_net_config(parsed.config).violations};
  if (parsed.config.width != parsed.config.height) {
    loaded.violations.push_back("width " + std::to_string(parsed.config.width) + " != height " +
                                std::to_string(parsed.config.height) + " (square grid required)");
  }
  return loaded;
}

namespace {

void report_config(const LoadedConfig& cfg, std::string_view cmd, std::ostream& err) {
  for (const auto& v : cfg.violations) err << cmd << ": config: " << v << "\n";
}

}  // namespace

int cmd_encode(const EncodeOptions& opt, std::ostream& out, std::ostream& err) {
  LoadedConfig cfg;
  try {
    cfg = load_config(opt.cfg);
  } catch (const Error& e) {
    err << "encode: " << e.what() << "\n";
    return kUsage;
  }
  if (!cfg.violations.empty()) {
    report_config(cfg, "encode", err);
    return kUsage;
  }
  std::vector<Annotation> labels;
  try {
    labels = parse_label_file(read_text_file(opt.labels), cfg.config.classes);
  } catch (const Error& e) {
    err << "encode: " << opt.labels.string() << ": " << e.what() << "\n";
    return kDataProblem;
  }
  try {
    const AnchorSet anchors(cfg.config.anchors);
    const int grid = cfg.config.width / 32;
    const EncodeResult enc = encode_targets(labels, grid, anchors, cfg.config.classes);
    write_file_atomic(opt.out, write_tensor(targets_to_raw(enc.targets, anchors)));
    json j;
    j["grid"] = grid;
    j["anchors"] = anchors.size();
    j["classes"] = cfg.config.classes;
    j["objects"] = enc.targets.object_count();
    j["collisions"] = enc.collisions;
    out << j.dump() << "\n";
  } catch (const Error& e) {
    err << "encode: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

int cmd_decode(const DecodeOptions& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.threshold >= 0.0 && opt.threshold <= 1.0)) {
    err << "decode: --threshold must be in [0, 1]\n";
    return kUsage;
  }
  if (!(opt.nms_iou >= 0.0 && opt.nms_iou <= 1.0)) {
    err << "decode: --nms-iou must be in [0, 1]\n";
    return kUsage;
  }
  try {
    const LoadedConfig cfg = load_config(opt.cfg);
    if (!cfg.violations.empty()) {
      report_config(cfg, "decode", err);
      return kUsage;
    }
    std::optional<ClassList> names;
    if (opt.names) {
      names = load_names(*opt.names);
      if (static_cast<int>(names->size()) != cfg.config.classes) {
        err << "decode: names file lists " << names->size() << " classes, config says " << cfg.config.classes
            << "\n";
        return kUsage;
      }
    }
    const RawTensor raw = read_tensor(read_text_file(opt.tensor));
    const int grid = cfg.config.width / 32;
    if (raw.grid() != grid || raw.anchors() != static_cast<int>(cfg.config.anchors.size()) ||
        raw.classes() != cfg.config.classes) {
      err << "decode: tensor is " << raw.grid() << "x" << raw.grid() << " grid, " << raw.anchors()
          << " anchors, " << raw.classes() << " classes; config expects " << grid << "x" << grid << ", "
          << cfg.config.anchors.size() << ", " << cfg.config.classes << "\n";
      return kUsage;
    }
    const AnchorSet anchors(cfg.config.anchors);
    const std::string image = opt.image.empty() ? opt.tensor.stem().string() : opt.image;
    for (const auto& d : nms(decode_tensor(raw, anchors, opt.threshold), opt.nms_iou)) {
      out << detection_json_line({image, d}, names ? &*names : nullptr) << "\n";
    }
  } catch (const Error& e) {
    err << "decode: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

int cmd_nms(const NmsOptions& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.nms_iou >= 0.0 && opt.nms_iou <= 1.0)) {
    err << "nms: --nms-iou must be in [0, 1]\n";
    return kUsage;
  }
  std::vector<ImageDetection> dets;
  std::optional<ClassList> names;
  try {
    if (opt.names) names = load_names(*opt.names);
    dets = parse_detection_lines(read_text_file(opt.detections));
  } catch (const Error& e) {
    err << "nms: " << e.what() << "\n";
    return kDataProblem;
  }
  // Images keep their first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<Detection>> by_image;
  for (auto& d : dets) {
    auto [it, inserted] = by_image.try_emplace(d.image);
    if (inserted) order.push_back(d.image);
    it->second.push_back(d.detection);
  }
  for (const auto& image : order) {
    for (const auto& d : nms(by_image[image], opt.nms_iou)) {
      out << detection_json_line({image, d}, names ? &*names : nullptr) << "\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

std::string to_json(const EvalReport& report, const ClassList& classes) {
  json j;
  json per_class = json::array();
  for (const auto& [id, c] : report.per_class) {
    json e;
    e["class_id"] = id;
    e["class"] = static_cast<std::size_t>(id) < classes.size() ? classes.name(id) : std::to_string(id);
    e["ap"] = c.ap ? json(*c.ap) : json(nullptr);
    e["gt_count"] = c.gt_count;
    e["tp"] = c.tp;
    e["fp"] = c.fp;
    json pr = json::array();
    for (const auto& p : c.pr_points) pr.push_back({p.recall, p.precision});
    e["pr_points"] = pr;
    per_class.push_back(e);
  }
  j["per_class"] = per_class;
  j["map"] = report.map ? json(*report.map) : json(nullptr);
  return j.dump() + "\n";
}

std::string to_table(const EvalReport& report, const ClassList& classes) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %8s\n", "class", "AP", "GT", "TP", "FP");
  os << buf;
  for (const auto& [id, c] : report.per_class) {
    const std::string name = static_cast<std::size_t>(id) < classes.size() ? classes.name(id) : std::to_string(id);
    const std::string ap = c.ap ? std::to_string(*c.ap).substr(0, 6) : "-";
    std::snprintf(buf, sizeof(buf), "%-16s %8s %8zu %8zu %8zu\n", name.c_str(), ap.c_str(), c.gt_count, c.tp, c.fp);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %8s\n", "mAP",
                report.map ? std::to_string(*report.map).substr(0, 6).c_str() : "-");
  os << buf;
  return os.str();
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.iou >= 0.0 && opt.iou <= 1.0)) {
    err << "eval: --iou must be in [0, 1]\n";
    return kUsage;
  }
  ClassList classes({"_"});
  Manifest manifest;
  try {
    classes = load_names(opt.names);
    manifest = load_manifest(opt.manifest);
  } catch (const Error& e) {
    err << "eval: " << e.what() << "\n";
    return kUsage;
  }

  const int class_count = static_cast<int>(classes.size());
  std::vector<ImageEval> images(manifest.entries.size());
  std::map<std::string, std::size_t> lookup;
  bool data_problem = false;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const std::string& entry = manifest.entries[i];
    lookup.emplace(entry, i);
    lookup.emplace(fs::path(entry).replace_extension().generic_string(), i);
    lookup.emplace(fs::path(entry).stem().string(), i);
    const fs::path label = label_path_for(resolve_entry(opt.manifest, entry));
    try {
      images[i].ground_truth = parse_label_file(read_text_file(label), class_count);
    } catch (const Error& e) {
      err << "eval: " << label.string() << ": " << e.what() << "\n";
      data_problem = true;
    }
  }
  if (data_problem) return kDataProblem;

  std::vector<ImageDetection> dets;
  try {
    dets = parse_detection_lines(read_text_file(opt.detections));
  } catch (const Error& e) {
    err << "eval: " << opt.detections.string() << ": " << e.what() << "\n";
    return kDataProblem;
  }
  std::vector<std::string> unknown;
  for (auto& d : dets) {
    const auto it = lookup.find(d.image);
    if (it == lookup.end()) {
      if (std::find(unknown.begin(), unknown.end(), d.image) == unknown.end()) unknown.push_back(d.image);
      continue;
    }
    images[it->second].detections.push_back(d.detection);
  }
  if (!unknown.empty()) {
    for (const auto& u : unknown) err << "eval: unknown image '" << u << "'\n";
    return kDataProblem;
  }

  EvalReport report;
  try {
    report = evaluate(images, class_count, opt.iou);
  } catch (const Error& e) {
    err << "eval: " << e.what() << "\n";
    return kDataProblem;
  }
  if (opt.out) {
    try {
      write_file_atomic(*opt.out, to_json(report, classes));
    } catch (const Error& e) {
      err << "eval: " << e.what() << "\n";
      return kUsage;
    }
    out << to_table(report, classes);
  } else {
    out << to_json(report, classes);
    err << to_table(report, classes);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_parse_log(const ParseLogOptions& opt, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_text_file(opt.log);
  } catch (const Error& e) {
    err << "parse-log: " << e.what() << "\n";
    return kUsage;
  }
  const TrainingLog log = parse_training_log(text);
  for (const auto& w : log.warnings) err << "parse-log: warning: " << w << "\n";
  const std::string csv = serialize_loss_csv(log.records);
  if (opt.out) {
    try {
      write_file_atomic(*opt.out, csv);
    } catch (const Error& e) {
      err << "parse-log: " << e.what() << "\n";
      return kUsage;
    }
  } else {
    out << csv;
  }
  return kOk;
}

int cmd_check_cfg(const CheckCfgOptions& opt, std::ostream& out, std::ostream& err) {
  LoadedConfig loaded;
  try {
    loaded = load_config(opt.cfg);
  } catch (const Error& e) {
    err << "check-cfg: " << e.what() << "\n";
    return kUsage;
  }
  const NetConfig& c = loaded.config;
  json cfg;
  cfg["width"] = c.width;
  cfg["height"] = c.height;
  cfg["channels"] = c.channels;
  cfg["classes"] = c.classes;
  json anchors = json::array();
  for (const auto& a : c.anchors) anchors.push_back({a.pw, a.ph});
  cfg["anchors"] = anchors;
  cfg["filters"] = c.filters;
  cfg["expected_filters"] = expected_filter_count(c.classes, static_cast<int>(c.anchors.size()));
  cfg["batch"] = c.batch;
  cfg["subdivisions"] = c.subdivisions;
  cfg["momentum"] = c.momentum;
  cfg["decay"] = c.decay;
  cfg["learning_rate"] = c.learning_rate;
  cfg["steps"] = c.steps;
  cfg["saturation"] = c.saturation;
  cfg["exposure"] = c.exposure;
  cfg["hue"] = c.hue;
  cfg["angle"] = c.angle;
  json j;
  j["config"] = cfg;
  j["warnings"] = loaded.warnings;
  j["violations"] = loaded.violations;
  j["ok"] = loaded.violations.empty();
  out << j.dump(2) << "\n";
  return loaded.violations.empty() ? kOk : kDataProblem;
}

}  // namespace detkit::cli
