// Shared on-disk fixtures for the CLI and acceptance suites.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "detkit/cli.hpp"
#include "detkit/formats.hpp"
#include "detkit/image.hpp"

namespace fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("detkit_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline constexpr const char* kNames = "cell\nlaptop\n";

inline constexpr const char* kCfg =
    "[net]\nbatch=64\nsubdivisions=16\nwidth=416\nheight=416\nchannels=3\nmomentum=0.9\ndecay=0.0005\n"
    "angle=0\nsaturation=1.5\nexposure=1.5\nhue=.1\nlearning_rate=0.001\nsteps=4800,540\n"
    "[convolutional]\nfilters=21\n[region]\nanchors=1.08,1.19,3.42,4.41,16.62,10.52\nclasses=2\nnum=3\n";

struct RectDataset {
  fs::path root;
  fs::path manifest;
  fs::path names;
  std::vector<std::string> entries;
};

/// Images with one rectangle in the left half and, sometimes, one in the
/// right half. The halves keep every object in its own grid cell and free
/// of overlap, so encode -> decode is lossless.
inline RectDataset make_rect_dataset(const fs::path& root, std::size_t count, detkit::Size size,
                                     std::uint64_t seed) {
  RectDataset ds{root, root / "all.txt", root / "names.txt", {}};
  write_text(ds.names, kNames);
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::string manifest;
  for (std::size_t i = 0; i < count; ++i) {
    detkit::RasterImage img(size, detkit::Rgb{std::uint8_t(pick(0, 80)), std::uint8_t(pick(0, 80)),
                                              std::uint8_t(pick(0, 80))});
    std::vector<detkit::Annotation> labels;
    const int objects = pick(1, 2);
    for (int k = 0; k < objects; ++k) {
      const int half = size.width / 2;
      const int w = pick(size.width / 8, half * 3 / 5);
      const int h = pick(size.height / 6, size.height * 3 / 5);
      const int x = k * half + pick(half / 10, half - w - half / 10);
      const int y = pick(0, size.height - h);
      const int cls = pick(0, 1);
      const detkit::Rgb color = cls == 0 ? detkit::Rgb{230, 40, 40} : detkit::Rgb{40, 40, 230};
      for (int yy = y; yy < y + h; ++yy) {
        for (int xx = x; xx < x + w; ++xx) img.at(xx, yy) = color;
      }
      labels.push_back({cls, detkit::pixel_to_norm({double(x), double(y), double(w), double(h)}, size)});
    }
    char name[64];
    std::snprintf(name, sizeof(name), "images/img_%05zu.png", i);
    fs::create_directories((root / name).parent_path());
    detkit::write_png(root / name, img);
    write_text(detkit::cli::label_path_for(root / name), detkit::serialize_label_file(labels));
    ds.entries.push_back(name);
    manifest += std::string(name) + "\n";
  }
  write_text(ds.manifest, manifest);
  return ds;
}

/// Runs the CLI in-process and captures both streams.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "detkit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliResult r;
  r.code = detkit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace fixtures
