#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <set>

#include "detkit/cli.hpp"
#include "detkit/codec.hpp"
#include "detkit/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace detkit;
using namespace detkit::cli;
using fixtures::run_cli;
using fixtures::TempDir;
using nlohmann::json;

namespace {

Manifest numbered_manifest(std::size_t n) {
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) m.entries.push_back("img" + std::to_string(i) + ".png");
  return m;
}

std::string det_line(const std::string& image, int cls, double score, BoxNorm b) {
  return detection_json_line({image, Detection{cls, score, b}}, nullptr) + "\n";
}

}  // namespace

TEST_CASE("validate") {
  TempDir dir("validate");
  const auto ds = fixtures::make_rect_dataset(dir.path(), 4, {64, 48}, 1);
  SUBCASE("clean fixture") {
    const auto r = run_cli({"validate", dir.path().string(), "--names", ds.names.string()});
    CHECK(r.code == kOk);
    const json j = json::parse(r.out);
    CHECK(j["images_checked"] == 4);
    CHECK(j["labels_missing"] == 0);
    CHECK(j["labels_malformed"] == 0);
  }
  SUBCASE("missing label") {
    fs::remove(label_path_for(dir / ds.entries[2]));
    const auto report = validate_dataset(dir.path(), parse_class_names(fixtures::kNames));
    CHECK(report.labels_missing == 1);
    CHECK_FALSE(report.clean());
    CHECK(run_cli({"validate", dir.path().string(), "--names", ds.names.string()}).code == kDataProblem);
  }
  SUBCASE("class id out of range") {
    fixtures::write_text(label_path_for(dir / ds.entries[0]), "7 0.5 0.5 0.2 0.2\n");
    const auto report = validate_dataset(dir.path(), parse_class_names(fixtures::kNames));
    CHECK(report.labels_malformed == 1);
    CHECK(run_cli({"validate", dir.path().string(), "--names", ds.names.string()}).code == kDataProblem);
  }
  SUBCASE("unreadable root") {
    CHECK(run_cli({"validate", (dir / "nope").string(), "--names", ds.names.string()}).code == kUsage);
  }
}

TEST_CASE("split_manifest sizes and partition") {
  SUBCASE("1000 entries at 0.8/0.1/0.1") {
    const Manifest m = numbered_manifest(1000);
    std::vector<int> strata(1000);
    for (std::size_t i = 0; i < strata.size(); ++i) strata[i] = static_cast<int>(i % 3);
    const auto s = split_manifest(m, strata, {0.8, 0.1, 0.1, 42});
    CHECK(s.train.entries.size() == 800);
    CHECK(s.val.entries.size() == 100);
    CHECK(s.test.entries.size() == 100);
    std::multiset<std::string> all(s.train.entries.begin(), s.train.entries.end());
    all.insert(s.val.entries.begin(), s.val.entries.end());
    all.insert(s.test.entries.begin(), s.test.entries.end());
    CHECK(all == std::multiset<std::string>(m.entries.begin(), m.entries.end()));
    CHECK(std::is_sorted(s.val.entries.begin(), s.val.entries.end(), [&](const auto& a, const auto& b) {
      return std::find(m.entries.begin(), m.entries.end(), a) < std::find(m.entries.begin(), m.entries.end(), b);
    }));
  }
  SUBCASE("remainder goes to train") {
    const auto s = split_manifest(numbered_manifest(10), std::vector<int>(10, 0), {0.5, 0.25, 0.25, 7});
    CHECK(s.train.entries.size() == 6);
    CHECK(s.val.entries.size() == 2);
    CHECK(s.test.entries.size() == 2);
  }
  SUBCASE("stratified shares") {
    // 600 of class 0, 400 of class 1: each split keeps the 60/40 ratio.
    std::vector<int> strata(1000);
    for (std::size_t i = 0; i < strata.size(); ++i) strata[i] = i % 5 < 3 ? 0 : 1;
    const Manifest m = numbered_manifest(1000);
    const auto s = split_manifest(m, strata, {0.8, 0.1, 0.1, 3});
    std::size_t zeros = 0;
    for (const auto& e : s.val.entries) {
      const std::size_t i = std::stoul(e.substr(3));
      zeros += strata[i] == 0;
    }
    CHECK(zeros == 60);
  }
  SUBCASE("seed changes the assignment, not the sizes") {
    const Manifest m = numbered_manifest(200);
    const std::vector<int> strata(200, 0);
    const auto a = split_manifest(m, strata, {0.8, 0.1, 0.1, 1});
    const auto b = split_manifest(m, strata, {0.8, 0.1, 0.1, 2});
    CHECK(a.val.entries.size() == b.val.entries.size());
    CHECK(a.val.entries != b.val.entries);
  }
  SUBCASE("bad fractions") {
    CHECK_THROWS_AS(split_manifest(numbered_manifest(4), std::vector<int>(4, 0), {0.8, 0.1, 0.2, 0}), RangeError);
    CHECK_THROWS_AS(split_manifest(numbered_manifest(4), std::vector<int>(4, 0), {1.2, -0.1, -0.1, 0}),
                    RangeError);
  }
}

TEST_CASE("split command") {
  TempDir dir("split");
  const auto ds = fixtures::make_rect_dataset(dir.path(), 40, {32, 32}, 2);
  const auto a = run_cli({"split", ds.manifest.string(), "--seed", "9", "--out", (dir / "a").string()});
  const auto b = run_cli({"split", ds.manifest.string(), "--seed", "9", "--out", (dir / "b").string()});
  REQUIRE(a.code == kOk);
  REQUIRE(b.code == kOk);
  CHECK(json::parse(a.out) == json({{"train", 32}, {"val", 4}, {"test", 4}}));
  for (const char* f : {"train.txt", "val.txt", "test.txt"}) {
    CHECK(fixtures::read_bytes(dir / "a" / f) == fixtures::read_bytes(dir / "b" / f));
  }
  CHECK(run_cli({"split", ds.manifest.string(), "--seed", "9", "--train", "0.7", "--out", (dir / "c").string()})
            .code == kUsage);
  CHECK(run_cli({"split", ds.manifest.string(), "--out", (dir / "d").string()}).code == kUsage);
}

TEST_CASE("augment command") {
  TempDir dir("augment");
  const auto ds = fixtures::make_rect_dataset(dir.path(), 6, {48, 40}, 3);
  const std::string manifest = ds.manifest.string(), names = ds.names.string();

  SUBCASE("copies multiply outputs") {
    const auto r = run_cli({"augment", manifest, "--names", names, "--seed", "5", "--copies", "2", "--out",
                            (dir / "out").string()});
    REQUIRE(r.code == kOk);
    const json j = json::parse(r.out);
    CHECK(j["inputs"] == 6);
    CHECK(j["outputs"] == 12);
    CHECK(fixtures::count_lines(fixtures::read_bytes(dir / "out" / "augmented.txt")) == 12);
    CHECK(fs::exists(dir / "out" / "img_00005_aug11.png"));
    CHECK(fs::exists(dir / "out" / "img_00005_aug11.txt"));
  }
  SUBCASE("identity parameters reproduce inputs") {
    const auto r = run_cli({"augment", manifest, "--names", names, "--seed", "5", "--saturation", "1", "--exposure",
                            "1", "--hue", "0", "--angle", "0", "--crop-jitter", "0", "--out", (dir / "id").string()});
    REQUIRE(r.code == kOk);
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
      const fs::path src = dir / ds.entries[i];
      const fs::path out = dir / "id" / (src.stem().string() + "_aug" + std::to_string(i) + ".png");
      CHECK(read_png(out) == read_png(src));
      CHECK(parse_label_file(fixtures::read_bytes(label_path_for(out)), 2) ==
            parse_label_file(fixtures::read_bytes(label_path_for(src)), 2));
    }
  }
  SUBCASE("thread count does not change bytes") {
    const auto serial = run_cli({"augment", manifest, "--names", names, "--seed", "11", "--copies", "2", "--threads",
                                 "1", "--out", (dir / "s").string()});
    const auto parallel = run_cli({"augment", manifest, "--names", names, "--seed", "11", "--copies", "2",
                                   "--threads", "8", "--out", (dir / "p").string()});
    REQUIRE(serial.code == kOk);
    REQUIRE(parallel.code == kOk);
    CHECK(serial.out == parallel.out);
    for (const auto& e : fs::directory_iterator(dir / "s")) {
      CHECK(fixtures::read_bytes(e.path()) == fixtures::read_bytes(dir / "p" / e.path().filename()));
    }
  }
  SUBCASE("missing label is reported and the rest continue") {
    fs::remove(label_path_for(dir / ds.entries[1]));
    const auto r = run_cli({"augment", manifest, "--names", names, "--seed", "5", "--out", (dir / "m").string()});
    CHECK(r.code == kDataProblem);
    const json j = json::parse(r.out);
    CHECK(j["outputs"] == 5);
    CHECK(j["failures"].size() == 1);
  }
  SUBCASE("bad parameters") {
    CHECK(run_cli({"augment", manifest, "--names", names, "--seed", "5", "--saturation", "0.5", "--out",
                   (dir / "x").string()})
              .code == kUsage);
    CHECK(run_cli({"augment", manifest, "--names", names, "--out", (dir / "x").string()}).code == kUsage);
  }
}

TEST_CASE("DETKIT_THREADS caps workers") {
  ::setenv("DETKIT_THREADS", "2", 1);
  CHECK(resolve_threads(8) == 2);
  CHECK(resolve_threads(1) == 1);
  ::unsetenv("DETKIT_THREADS");
  CHECK(resolve_threads(8) == 8);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("majority_class") {
  CHECK(majority_class("1 .5 .5 .1 .1\n0 .5 .5 .1 .1\n1 .2 .2 .1 .1\n") == 1);
  CHECK(majority_class("1 .5 .5 .1 .1\n0 .5 .5 .1 .1\n") == 0);
  CHECK(majority_class("") == -1);
}

TEST_CASE("letterbox command") {
  const auto r = run_cli({"letterbox", "--src", "1280x720"});
  REQUIRE(r.code == kOk);
  const json j = json::parse(r.out);
  CHECK(j["scaled"] == json({416, 234}));
  CHECK(j["pad_x"] == 0);
  CHECK(j["pad_y"] == 91);
  CHECK(run_cli({"letterbox", "--src", "12x"}).code == kUsage);
  CHECK(run_cli({"letterbox"}).code == kUsage);

  TempDir dir("letterbox");
  RasterImage img({80, 40}, Rgb{10, 200, 30});
  write_png(dir / "a.png", img);
  fixtures::write_text(dir / "a.txt", "1 0.500000 0.500000 0.500000 0.500000\n");
  const auto w = run_cli({"letterbox", "--image", (dir / "a.png").string(), "--dst", "64x64", "--out",
                          (dir / "b.png").string()});
  REQUIRE(w.code == kOk);
  const RasterImage out = read_png(dir / "b.png");
  CHECK(out.size() == Size{64, 64});
  CHECK(out.at(0, 0) == kFillGray);
  CHECK(out.at(32, 32) == Rgb{10, 200, 30});
  const auto mapped = parse_label_file(fixtures::read_bytes(dir / "b.txt"), 2);
  REQUIRE(mapped.size() == 1);
  CHECK(mapped[0].box.cx == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(mapped[0].box.cy == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(mapped[0].box.w == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(mapped[0].box.h == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("check-cfg command") {
  TempDir dir("cfg");
  fixtures::write_text(dir / "ok.cfg", fixtures::kCfg);
  std::string bad = fixtures::kCfg;
  bad.replace(bad.find("filters=21"), 10, "filters=18");
  fixtures::write_text(dir / "bad.cfg", bad);
  fixtures::write_text(dir / "broken.cfg", "[net]\nwidth=416\n");

  const auto ok = run_cli({"check-cfg", "--cfg", (dir / "ok.cfg").string()});
  CHECK(ok.code == kOk);
  const json j = json::parse(ok.out);
  CHECK(j["config"]["expected_filters"] == 21);
  CHECK(j["config"]["batch"] == 64);
  CHECK(j["ok"] == true);

  const auto b = run_cli({"check-cfg", "--cfg", (dir / "bad.cfg").string()});
  CHECK(b.code == kDataProblem);
  CHECK(b.out.find("filters 18 != 21") != std::string::npos);
  CHECK(run_cli({"check-cfg", "--cfg", (dir / "broken.cfg").string()}).code == kUsage);
  CHECK(run_cli({"check-cfg", "--cfg", (dir / "absent.cfg").string()}).code == kUsage);
}

TEST_CASE("encode and decode commands") {
  TempDir dir("codec");
  fixtures::write_text(dir / "net.cfg", fixtures::kCfg);
  fixtures::write_text(dir / "names.txt", fixtures::kNames);
  const std::string cfg = (dir / "net.cfg").string();

  SUBCASE("zero tensor yields nothing") {
    fixtures::write_text(dir / "zero.bin", write_tensor(RawTensor(13, 3, 2)));
    const auto r = run_cli({"decode", (dir / "zero.bin").string(), "--cfg", cfg});
    CHECK(r.code == kOk);
    CHECK(r.out.empty());
  }
  SUBCASE("single-hot tensor yields one detection") {
    RawTensor raw(13, 3, 2);
    auto v = raw.slot(6, 6, 0);
    v[4] = 10.0f;
    v[5] = 5.0f;
    v[6] = -5.0f;
    fixtures::write_text(dir / "hot.bin", write_tensor(raw));
    const auto r = run_cli({"decode", (dir / "hot.bin").string(), "--cfg", cfg, "--names",
                            (dir / "names.txt").string()});
    REQUIRE(r.code == kOk);
    REQUIRE(fixtures::count_lines(r.out) == 1);
    const json j = json::parse(r.out);
    CHECK(j["image"] == "hot");
    CHECK(j["class_id"] == 0);
    CHECK(j["class"] == "cell");
    const double expected = oracle::sigmoid(10.0) * oracle::softmax({5.0, -5.0})[0];
    CHECK(std::abs(j["score"].get<double>() - expected) < 1e-9);
  }
  SUBCASE("usage errors") {
    fixtures::write_text(dir / "zero.bin", write_tensor(RawTensor(13, 3, 2)));
    CHECK(run_cli({"decode", (dir / "zero.bin").string(), "--cfg", cfg, "--threshold", "1.01"}).code == kUsage);
    std::string bad = fixtures::kCfg;
    bad.replace(bad.find("filters=21"), 10, "filters=18");
    fixtures::write_text(dir / "bad.cfg", bad);
    const auto r = run_cli({"decode", (dir / "zero.bin").string(), "--cfg", (dir / "bad.cfg").string()});
    CHECK(r.code == kUsage);
    CHECK(r.err.find("filters") != std::string::npos);
    fixtures::write_text(dir / "small.bin", write_tensor(RawTensor(13, 1, 2)));
    CHECK(run_cli({"decode", (dir / "small.bin").string(), "--cfg", cfg}).code == kUsage);
  }
  SUBCASE("encode then decode recovers the labels") {
    const std::vector<Annotation> labels{{0, {0.2, 0.3, 0.1, 0.2}}, {1, {0.7, 0.6, 0.5, 0.4}}};
    fixtures::write_text(dir / "a.txt", serialize_label_file(labels));
    const auto e = run_cli({"encode", (dir / "a.txt").string(), "--cfg", cfg, "--out", (dir / "a.bin").string()});
    REQUIRE(e.code == kOk);
    CHECK(json::parse(e.out)["objects"] == 2);
    const auto d = run_cli({"decode", (dir / "a.bin").string(), "--cfg", cfg});
    REQUIRE(d.code == kOk);
    const auto dets = parse_detection_lines(d.out);
    REQUIRE(dets.size() == 2);
    for (const auto& label : labels) {
      const bool found = std::any_of(dets.begin(), dets.end(), [&](const ImageDetection& x) {
        return x.detection.class_id == label.class_id && std::abs(x.detection.box.cx - label.box.cx) < 1e-6 &&
               std::abs(x.detection.box.cy - label.box.cy) < 1e-6 &&
               std::abs(x.detection.box.w - label.box.w) < 1e-6 && std::abs(x.detection.box.h - label.box.h) < 1e-6;
      });
      CHECK(found);
    }
  }
  SUBCASE("encode rejects a class beyond the config") {
    fixtures::write_text(dir / "c.txt", "5 0.5 0.5 0.1 0.1\n");
    CHECK(run_cli({"encode", (dir / "c.txt").string(), "--cfg", cfg, "--out", (dir / "c.bin").string()}).code ==
          kDataProblem);
  }
}

TEST_CASE("nms command") {
  TempDir dir("nms");
  std::string lines = det_line("a", 0, 0.9, {0.5, 0.5, 0.2, 0.2}) + det_line("a", 0, 0.8, {0.51, 0.5, 0.2, 0.2}) +
                      det_line("a", 1, 0.7, {0.5, 0.5, 0.2, 0.2}) + det_line("b", 0, 0.6, {0.5, 0.5, 0.2, 0.2});
  fixtures::write_text(dir / "d.jsonl", lines);
  const auto r = run_cli({"nms", (dir / "d.jsonl").string()});
  REQUIRE(r.code == kOk);
  const auto kept = parse_detection_lines(r.out);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].image == "a");
  CHECK(kept[0].detection.score == 0.9);
  CHECK(kept[2].image == "b");
  fixtures::write_text(dir / "bad.jsonl", "{not json\n");
  CHECK(run_cli({"nms", (dir / "bad.jsonl").string()}).code == kDataProblem);
}

TEST_CASE("detection lines round trip") {
  const ImageDetection d{"x.png", Detection{1, 0.123456789, {0.1, 0.2, 0.3, 0.4}}};
  const auto parsed = parse_detection_lines(detection_json_line(d, nullptr));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].image == "x.png");
  CHECK(parsed[0].detection.score == 0.123456789);
  CHECK(parsed[0].detection.box.h == 0.4);
  CHECK_THROWS_AS(parse_detection_lines("{\"image\":\"a\"}\n"), ParseError);
  CHECK_THROWS_AS(parse_detection_lines(detection_json_line({"a", Detection{0, 1.5, {}}}, nullptr)), RangeError);
}

TEST_CASE("eval command") {
  TempDir dir("eval");
  const auto ds = fixtures::make_rect_dataset(dir.path(), 5, {64, 48}, 4);
  const std::string manifest = ds.manifest.string(), names = ds.names.string();

  SUBCASE("ground truth as detections") {
    std::string lines;
    for (const auto& e : ds.entries) {
      for (const auto& a : parse_label_file(fixtures::read_bytes(label_path_for(dir / e)), 2)) {
        lines += det_line(e, a.class_id, 1.0, a.box);
      }
    }
    fixtures::write_text(dir / "gt.jsonl", lines);
    const auto r = run_cli({"eval", (dir / "gt.jsonl").string(), "--manifest", manifest, "--names", names});
    REQUIRE(r.code == kOk);
    CHECK(json::parse(r.out)["map"] == 1.0);
    CHECK(r.err.find("mAP") != std::string::npos);
  }
  SUBCASE("empty detections") {
    fixtures::write_text(dir / "none.jsonl", "");
    const auto r = run_cli({"eval", (dir / "none.jsonl").string(), "--manifest", manifest, "--names", names});
    REQUIRE(r.code == kOk);
    CHECK(json::parse(r.out)["map"] == 0.0);
  }
  SUBCASE("unknown image") {
    fixtures::write_text(dir / "u.jsonl", det_line("ghost.png", 0, 0.5, {0.5, 0.5, 0.1, 0.1}));
    const auto r = run_cli({"eval", (dir / "u.jsonl").string(), "--manifest", manifest, "--names", names});
    CHECK(r.code == kDataProblem);
    CHECK(r.err.find("ghost.png") != std::string::npos);
  }
  SUBCASE("stem matching and --out") {
    const auto first = parse_label_file(fixtures::read_bytes(label_path_for(dir / ds.entries[0])), 2);
    fixtures::write_text(dir / "s.jsonl", det_line("img_00000", first[0].class_id, 0.9, first[0].box));
    const auto r = run_cli({"eval", (dir / "s.jsonl").string(), "--manifest", manifest, "--names", names, "--out",
                            (dir / "report.json").string()});
    REQUIRE(r.code == kOk);
    CHECK(r.out.find("mAP") != std::string::npos);
    const json j = json::parse(fixtures::read_bytes(dir / "report.json"));
    bool hit = false;
    for (const auto& c : j["per_class"]) hit = hit || (c["class_id"] == first[0].class_id && c["tp"] == 1);
    CHECK(hit);
  }
}

TEST_CASE("eval reproduces the two-class 0.81 / 0.79 aggregation") {
  // Ten images, each with one "cell" object on the right and one "laptop"
  // object on the left. Ranked TP/FP flags below were chosen with the
  // cutoff-enumeration oracle to give AP 0.79 (cell) and 0.81 (laptop).
  const std::vector<bool> cell_flags{true, true,  true,  true,  true,  true, false, false,
                                     false, true, false, false, false, true, true};
  const std::vector<bool> laptop_flags{false, true, true, true, true, true, true, true, true, true};
  REQUIRE(std::abs(oracle::cutoff_ap(cell_flags, 10) - 0.79) < 1e-12);
  REQUIRE(std::abs(oracle::cutoff_ap(laptop_flags, 10) - 0.81) < 1e-12);

  TempDir dir("eval81");
  fixtures::write_text(dir / "names.txt", fixtures::kNames);
  const BoxNorm cell_box{0.75, 0.5, 0.2, 0.2}, laptop_box{0.25, 0.5, 0.2, 0.2};
  std::string manifest;
  for (int i = 0; i < 10; ++i) {
    const std::string name = "im" + std::to_string(i) + ".png";
    manifest += name + "\n";
    fixtures::write_text(dir / ("im" + std::to_string(i) + ".txt"),
                         serialize_label_file({{0, cell_box}, {1, laptop_box}}));
  }
  fixtures::write_text(dir / "gt.txt", manifest);

  std::string lines;
  auto emit = [&lines](int cls, const std::vector<bool>& flags, BoxNorm hit, BoxNorm miss) {
    int next_gt = 0;
    for (std::size_t k = 0; k < flags.size(); ++k) {
      const double score = 0.99 - 0.01 * static_cast<double>(k);
      if (flags[k]) {
        lines += det_line("im" + std::to_string(next_gt++) + ".png", cls, score, hit);
      } else {
        lines += det_line("im0.png", cls, score, miss);
      }
    }
  };
  emit(0, cell_flags, cell_box, {0.75, 0.9, 0.05, 0.05});
  emit(1, laptop_flags, laptop_box, {0.25, 0.1, 0.05, 0.05});
  fixtures::write_text(dir / "d.jsonl", lines);

  const auto r = run_cli({"eval", (dir / "d.jsonl").string(), "--manifest", (dir / "gt.txt").string(), "--names",
                          (dir / "names.txt").string()});
  REQUIRE(r.code == kOk);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["per_class"][0]["ap"].get<double>() - 0.79) < 1e-9);
  CHECK(std::abs(j["per_class"][1]["ap"].get<double>() - 0.81) < 1e-9);
  CHECK(std::abs(j["map"].get<double>() - 0.80) < 1e-9);
}

TEST_CASE("parse-log command") {
  TempDir dir("log");
  fixtures::write_text(dir / "train.log",
                       "Loaded: 0.1 seconds\n"
                       " 1: 800.5, 800.5 avg, 0.001 rate, 3.2 seconds, 64 images\n"
                       " 2: 700.25, 790.5 avg, 0.001 rate, 3.1 seconds, 128 images\n"
                       "Region Avg IOU: 0.2\n"
                       " 3: 650, 776.45 avg, 0.001 rate, 3.0 seconds, 192 images\n");
  const auto r = run_cli({"parse-log", (dir / "train.log").string()});
  REQUIRE(r.code == kOk);
  CHECK(r.out == "iteration,loss,avg_loss\n1,800.5,800.5\n2,700.25,790.5\n3,650,776.45\n");

  fixtures::write_text(dir / "garbage.log", "no loss lines here\n\x01\x02\n");
  const auto g = run_cli({"parse-log", (dir / "garbage.log").string()});
  CHECK(g.code == kOk);
  CHECK(g.out == "iteration,loss,avg_loss\n");

  CHECK(run_cli({"parse-log", (dir / "missing.log").string()}).code == kUsage);

  SUBCASE("generated log stays monotone") {
    std::string log;
    for (int i = 1; i <= 500; ++i) {
      log += std::to_string(i) + ": " + std::to_string(1000.0 / i) + ", " + std::to_string(900.0 / i) + " avg\n";
    }
    fixtures::write_text(dir / "gen.log", log);
    const auto out = run_cli({"parse-log", (dir / "gen.log").string(), "--out", (dir / "gen.csv").string()});
    REQUIRE(out.code == kOk);
    const auto records = parse_training_log(log).records;
    REQUIRE(records.size() == 500);
    for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].iteration > records[i - 1].iteration);
    CHECK(fixtures::count_lines(fixtures::read_bytes(dir / "gen.csv")) == 501);
  }
}

TEST_CASE("argument errors") {
  CHECK(run_cli({}).code == kUsage);
  CHECK(run_cli({"frobnicate"}).code == kUsage);
  CHECK(run_cli({"decode", "x.bin", "--cfg", "y.cfg", "--bogus"}).code == kUsage);
  CHECK(run_cli({"--help"}).code == kOk);
}
