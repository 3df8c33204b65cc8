#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detkit/augment.hpp"
#include "detkit/codec.hpp"
#include "detkit/evaluation.hpp"
#include "detkit/formats.hpp"

namespace detkit::cli {

namespace fs = std::filesystem;

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kDataProblem = 1, kUsage = 2 };

// ---------------------------------------------------------------------------
// Dataset helpers

std::string read_text_file(const fs::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view bytes);

/// `images/a.png` -> `images/a.txt`.
fs::path label_path_for(const fs::path& image);

bool is_image_file(const fs::path& path);

/// Sorted list of image files below `root`.
std::vector<fs::path> list_images(const fs::path& root);

/// Worker count: `requested` if positive, else the hardware concurrency;
/// capped by the DETKIT_THREADS environment variable when set.
unsigned resolve_threads(unsigned requested);

/// Most frequent class id among the label lines; ties go to the lowest id.
/// -1 when the text holds no parseable line.
int majority_class(std::string_view label_text);

// ---------------------------------------------------------------------------
// validate

struct ValidationReport {
  std::size_t images_checked = 0;
  std::size_t labels_missing = 0;
  std::size_t labels_malformed = 0;
  std::size_t boxes_out_of_range = 0;
  std::map<std::string, std::size_t> objects_per_class;
  std::vector<std::string> problems;

  bool clean() const { return labels_missing == 0 && labels_malformed == 0; }
};

/// Throws detkit::Error when `root` is not a readable directory.
ValidationReport validate_dataset(const fs::path& root, const ClassList& classes);
std::string to_json(const ValidationReport& report);

struct ValidateOptions {
  fs::path root;
  fs::path names;
};
int cmd_validate(const ValidateOptions& opt, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// split

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Manifest train;
  Manifest val;
  Manifest test;
};

/// Deterministic stratified split. `strata[i]` is the stratum of entry i.
/// val and test sizes are floor(n * fraction); train takes the remainder.
/// Each split lists its entries in manifest order. Throws RangeError when
/// fractions are negative or do not sum to 1 within 1e-9.
SplitResult split_manifest(const Manifest& manifest, const std::vector<int>& strata, const SplitSpec& spec);

struct SplitOptions {
  fs::path manifest;
  SplitSpec spec;
  fs::path out_dir;
};
/// Writes train.txt, val.txt and test.txt into `out_dir`.
int cmd_split(const SplitOptions& opt, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// augment

struct AugmentOptions {
  fs::path manifest;
  fs::path names;
  AugmentParams params;
  std::size_t copies = 1;
  fs::path out_dir;
  unsigned threads = 0;
};
/// For image ordinal i and copy c writes `<stem>_aug<i*copies+c>.png` and
/// its `.txt` label, plus `augmented.txt` listing the outputs in index order.
int cmd_augment(const AugmentOptions& opt, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// letterbox

struct LetterboxOptions {
  std::optional<Size> src;
  Size dst{416, 416};
  std::optional<fs::path> image;
  std::optional<fs::path> out;
};
int cmd_letterbox(const LetterboxOptions& opt, std::ostream& out, std::ostream& err);

/// Parses `WxH`.
std::optional<Size> parse_size(std::string_view text);

// ---------------------------------------------------------------------------
// codec commands

/// A Detection tagged with the image it belongs to.
struct ImageDetection {
  std::string image;
  Detection detection;
};

/// One JSON object per line: image, class_id, class, score, box.
std::string detection_json_line(const ImageDetection& d, const ClassList* classes);
/// Throws ParseError with the line number on malformed input.
std::vector<ImageDetection> parse_detection_lines(std::string_view text);

/// Loads and validates a config; violations are returned as an error
/// message list (empty when usable).
struct LoadedConfig {
  NetConfig config;
  std::vector<std::string> warnings;
  std::vector<std::string> violations;
};
LoadedConfig load_config(const fs::path& path);

struct EncodeOptions {
  fs::path labels;
  fs::path cfg;
  fs::path out;
};
/// Assigns the labels to anchor slots and writes the logit tensor that
/// decodes back to them.
int cmd_encode(const EncodeOptions& opt, std::ostream& out, std::ostream& err);

struct DecodeOptions {
  fs::path tensor;
  fs::path cfg;
  std::optional<fs::path> names;
  std::string image;  ///< defaults to the tensor file stem
  double threshold = 0.6;
  double nms_iou = 0.5;
};
int cmd_decode(const DecodeOptions& opt, std::ostream& out, std::ostream& err);

struct NmsOptions {
  fs::path detections;
  std::optional<fs::path> names;
  double nms_iou = 0.5;
};
int cmd_nms(const NmsOptions& opt, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// eval

std::string to_json(const EvalReport& report, const ClassList& classes);
std::string to_table(const EvalReport& report, const ClassList& classes);

struct EvalOptions {
  fs::path detections;
  fs::path manifest;
  fs::path names;
  double iou = 0.5;
  std::optional<fs::path> out;  ///< JSON destination; stdout when unset
};
/// JSON report to `out` (or the --out file) and the table to `err` (or
/// `out` when the JSON goes to a file).
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// utilities

struct ParseLogOptions {
  fs::path log;
  std::optional<fs::path> out;
};
int cmd_parse_log(const ParseLogOptions& opt, std::ostream& out, std::ostream& err);

struct CheckCfgOptions {
  fs::path cfg;
};
int cmd_check_cfg(const CheckCfgOptions& opt, std::ostream& out, std::ostream& err);

/// Entry point used by the executable; argv[0] is the program name.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace detkit::cli
