#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "../text_util.hpp"
#include "detkit/cli.hpp"
#include "detkit/error.hpp"
#include "detkit/random.hpp"

namespace detkit::cli {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

fs::path label_path_for(const fs::path& image) {
  fs::path p = image;
  p.replace_extension(".txt");
  return p;
}

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

std::vector<fs::path> list_images(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

unsigned resolve_threads(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DETKIT_THREADS")) {
    if (const auto cap = detail::parse_number<unsigned>(env); cap && *cap > 0) n = std::min(n, *cap);
  }
  return n;
}

int majority_class(std::string_view label_text) {
  std::map<int, std::size_t> counts;
  for (auto line : split_lines(label_text)) {
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (const auto id = detail::parse_number<int>(fields[0]); id && *id >= 0) ++counts[*id];
  }
  int best = -1;
  std::size_t best_count = 0;
  for (const auto& [id, count] : counts) {
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

ValidationReport validate_dataset(const fs::path& root, const ClassList& classes) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error("dataset root " + root.string() + " is not a readable directory");

  ValidationReport report;
  for (const auto& name : classes.names()) report.objects_per_class[name] = 0;
  const int class_count = static_cast<int>(classes.size());

  for (const auto& image : list_images(root)) {
    ++report.images_checked;
    const fs::path label = label_path_for(image);
    const auto rel = fs::relative(label, root).generic_string();
    if (!fs::exists(label)) {
      ++report.labels_missing;
      report.problems.push_back(rel + ": missing label file");
      continue;
    }
    std::string text;
    try {
      text = read_text_file(label);
    } catch (const Error& e) {
      ++report.labels_malformed;
      report.problems.push_back(rel + ": " + e.what());
      continue;
    }
    bool bad = false;
    std::vector<int> found;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      try {
        found.push_back(parse_label_line(lines[i], class_count, i + 1).class_id);
      } catch (const RangeError& e) {
        bad = true;
        const auto id = detail::parse_number<int>(detail::split_fields(lines[i])[0]);
        if (id && *id >= 0 && *id < class_count) ++report.boxes_out_of_range;
        report.problems.push_back(rel + ": " + e.what());
      } catch (const ParseError& e) {
        bad = true;
        report.problems.push_back(rel + ": " + e.what());
      }
    }
    if (bad) {
      ++report.labels_malformed;
      continue;
    }
    for (int id : found) ++report.objects_per_class[classes.name(id)];
  }
  return report;
}

std::string to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["images_checked"] = r.images_checked;
  j["labels_missing"] = r.labels_missing;
  j["labels_malformed"] = r.labels_malformed;
  j["boxes_out_of_range"] = r.boxes_out_of_range;
  j["objects_per_class"] = r.objects_per_class;
  j["problems"] = r.problems;
  return j.dump(2) + "\n";
}

SplitResult split_manifest(const Manifest& manifest, const std::vector<int>& strata, const SplitSpec& spec) {
  if (spec.train < 0.0 || spec.val < 0.0 || spec.test < 0.0) throw RangeError("split fractions must be >= 0");
  if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) throw RangeError("split fractions must sum to 1");
  if (strata.size() != manifest.entries.size()) throw RangeError("one stratum per manifest entry required");

  const std::size_t n = manifest.entries.size();
  const auto n_val = static_cast<std::size_t>(std::floor(n * spec.val + 1e-9));
  const auto n_test = std::min(n - n_val, static_cast<std::size_t>(std::floor(n * spec.test + 1e-9)));

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[strata[i]].push_back(i);

  // Each stratum is shuffled on its own stream, then its members are spread
  // over [0, 1) so that any prefix of the merged order is proportionally
  // stratified.
  struct Keyed {
    double position;
    int stratum;
    std::size_t rank;
    std::size_t entry;
  };
  std::vector<Keyed> merged;
  merged.reserve(n);
  for (auto& [stratum, members] : groups) {
    CounterStream rng(spec.seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(stratum) + 1));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.next_u64() % i]);
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      merged.push_back({(k + 0.5) / static_cast<double>(members.size()), stratum, k, members[k]});
    }
  }
  std::sort(merged.begin(), merged.end(), [](const Keyed& a, const Keyed& b) {
    if (a.position != b.position) return a.position < b.position;
    return a.stratum < b.stratum;
  });

  std::vector<int> bucket(n, 0);  // 0 train, 1 val, 2 test
  for (std::size_t k = 0; k < n; ++k) {
    bucket[merged[k].entry] = k < n_val ? 1 : (k < n_val + n_test ? 2 : 0);
  }
  SplitResult result;
  for (std::size_t i = 0; i < n; ++i) {
    Manifest& dst = bucket[i] == 1 ? result.val : bucket[i] == 2 ? result.test : result.train;
    dst.entries.push_back(manifest.entries[i]);
  }
  return result;
}

}  // namespace detkit::cli
