#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "json.hpp"
#include "rppg/error.hpp"
#include "rppg/io.hpp"

using namespace rppg;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("rppg_test_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  fs::path dir_;
};

Error parse_error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an error";
  return Error(ErrorKind::Io, "");
}

RgbFrame random_frame(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h) {
  RgbFrame f{w, h, std::vector<std::uint8_t>(3ull * w * h)};
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : f.pixels) v = static_cast<std::uint8_t>(byte(rng));
  return f;
}

}  // namespace

using TraceCsv = TempDir;

TEST_F(TraceCsv, RoundTripRandomTraces) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> px(0, 255), rate(1, 120), t0(-100, 100);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial * 7;
    std::array<std::vector<double>, 3> ch;
    for (auto& c : ch) {
      c.resize(n);
      for (auto& v : c) v = px(rng);
    }
    RgbTrace t(rate(rng), ch[0], ch[1], ch[2], t0(rng));
    const auto p = dir_ / "t.csv";
    write_trace_csv(t, p);
    const auto back = read_trace_csv(p);
    ASSERT_EQ(back.size(), n);
    EXPECT_NEAR(back.sample_rate_hz(), t.sample_rate_hz(), 1e-9);
    EXPECT_NEAR(back.t0_s(), t.t0_s(), 1e-9);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(back.channel(static_cast<Channel>(c))[i], ch[c][i], 1e-9);
      }
    }
  }
}

TEST_F(TraceCsv, FormatContract) {
  auto t = read_trace_csv(write("a.csv", "# fps=25\n# t0=1.5\n1,2,3\n4,5,6\n7,8,9\n"));
  EXPECT_EQ(t.sample_rate_hz(), 25.0);
  EXPECT_EQ(t.t0_s(), 1.5);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.b()[2], 9.0);
}

TEST_F(TraceCsv, MalformedInputs) {
  const auto ragged = parse_error_of([&] { read_trace_csv(write("r.csv", "# fps=25\n# t0=0\n1,2,3\n4,5\n")); });
  EXPECT_EQ(ragged.kind(), ErrorKind::Parse);
  EXPECT_NE(std::string(ragged.what()).find(":4:"), std::string::npos) << ragged.what();

  const std::vector<std::string> bad{
      "# t0=0\n1,2,3\n4,5,6\n",                       // missing fps
      "# fps=25\n# fps=25\n# t0=0\n1,2,3\n4,5,6\n",   // repeated key
      "# fps=25\n# t0=0\n# gain=2\n1,2,3\n4,5,6\n",   // unknown key
      "# fps=0\n# t0=0\n1,2,3\n4,5,6\n",              // non-positive rate
      "# fps=abc\n# t0=0\n1,2,3\n4,5,6\n",            // non-numeric header
      "# fps=25\n# t0=0\n1,2,x\n4,5,6\n",             // non-numeric cell
      "# fps=25\n# t0=0\n1,2,3\n\n4,5,6\n",           // blank line
      "# fps=25\r\n# t0=0\r\n1,2,3\r\n4,5,6\r\n",     // CR line endings
      "# fps=25\n# t0=0\n1,2,3,4\n4,5,6,7\n",         // too many columns
      "# fps=25\n# t0=0\n1,2,300\n4,5,6\n",           // out of range
      "# fps=25\n# t0=0\n1,2,3\n",                    // one row
      "# fps=25\n# t0=0\n1,2,3\n# t0=1\n4,5,6\n",     // header after data
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    EXPECT_EQ(parse_error_of([&] { read_trace_csv(write("b" + std::to_string(i) + ".csv", bad[i])); }).kind(),
              ErrorKind::Parse)
        << bad[i];
  }
  const auto missing = parse_error_of([&] { read_trace_csv(dir_ / "nope.csv"); });
  EXPECT_EQ(missing.kind(), ErrorKind::Io);
  EXPECT_NE(std::string(missing.what()).find("nope.csv"), std::string::npos);
}

using PpgCsv = TempDir;

TEST_F(PpgCsv, RoundTripAndLength) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> v(60000);
  for (auto& x : v) x = g(rng);
  SampledSeries s(1000.0, v, 0.25);
  write_ppg_csv(s, dir_ / "p.csv");
  auto back = read_ppg_csv(dir_ / "p.csv");
  EXPECT_EQ(back.size(), 60000u);
  EXPECT_NEAR(back.duration_s() + 1.0 / 1000.0, 60.0, 1e-9);
  EXPECT_EQ(back.t0_s(), 0.25);
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(back[i], v[i], 1e-9);
}

TEST_F(PpgCsv, Errors) {
  EXPECT_EQ(parse_error_of([&] { read_ppg_csv(write("e.csv", "# rate_hz=100\n# t0=0\n")); }).kind(),
            ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_ppg_csv(write("f.csv", "# rate_hz=100\n# t0=0\n1,2\n")); }).kind(),
            ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_ppg_csv(write("g.csv", "# fps=100\n# t0=0\n1\n")); }).kind(),
            ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_ppg_csv(write("h.csv", "# rate_hz=100\n# t0=0\nnan\n")); }).kind(),
            ErrorKind::Parse);
}

using Frames = TempDir;

TEST_F(Frames, FileRoundTripAndCorruption) {
  std::mt19937_64 rng(3);
  auto f = random_frame(rng, 5, 3);
  write_frame(f, dir_ / "frame_0.rgb8");
  auto back = read_frame(dir_ / "frame_0.rgb8");
  EXPECT_EQ(back.width, 5u);
  EXPECT_EQ(back.height, 3u);
  EXPECT_EQ(back.pixels, f.pixels);

  std::ifstream in(dir_ / "frame_0.rgb8", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(bytes.substr(0, 4), "RGB8");
  EXPECT_EQ(bytes.size(), 12u + 45u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 5);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);

  EXPECT_EQ(parse_error_of([&] { read_frame(write("t.rgb8", bytes.substr(0, 40))); }).kind(), ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_frame(write("x.rgb8", bytes + "z")); }).kind(), ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_frame(write("m.rgb8", "RGB9" + bytes.substr(4))); }).kind(), ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_frame(write("h.rgb8", "RGB8")); }).kind(), ErrorKind::Parse);
}

TEST_F(Frames, ConstantFramesGiveTheirColour) {
  RgbFrame a{4, 4, {}}, b{4, 4, {}};
  for (int i = 0; i < 16; ++i) {
    a.pixels.insert(a.pixels.end(), {10, 20, 30});
    b.pixels.insert(b.pixels.end(), {20, 30, 40});
  }
  write_frame(a, dir_ / "frame_0.rgb8");
  write_frame(b, dir_ / "frame_1.rgb8");
  auto t = read_frame_dump(dir_, RoiSpec::full(), 30.0);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.r()[0], 10.0);
  EXPECT_EQ(t.g()[0], 20.0);
  EXPECT_EQ(t.b()[0], 30.0);
  EXPECT_EQ(t.r()[1], 20.0);
  EXPECT_EQ(t.b()[1], 40.0);
  EXPECT_EQ(t.sample_rate_hz(), 30.0);
}

TEST_F(Frames, RoiRestrictsToRectangle) {
  RgbFrame f{8, 4, std::vector<std::uint8_t>(8 * 4 * 3, 0)};
  for (std::uint32_t y = 0; y < 4; ++y) {
    for (std::uint32_t x = 4; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) f.pixels[3 * (y * 8 + x) + c] = 255;
    }
  }
  auto left = frame_roi_mean(f, RoiSpec::rect(0, 0, 4, 4));
  auto right = frame_roi_mean(f, RoiSpec::rect(4, 0, 4, 4));
  auto all = frame_roi_mean(f, RoiSpec::full());
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(left[c], 0.0);
    EXPECT_EQ(right[c], 255.0);
    EXPECT_EQ(all[c], 127.5);
  }
  EXPECT_THROW(frame_roi_mean(f, RoiSpec::rect(5, 0, 4, 4)), Error);
  EXPECT_THROW(frame_roi_mean(f, RoiSpec::rect(0, 1, 1, 4)), Error);
}

TEST_F(Frames, MeansMatchBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint32_t> dim(1, 23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t w = dim(rng), h = dim(rng);
    auto f = random_frame(rng, w, h);
    const std::uint32_t rx = std::uniform_int_distribution<std::uint32_t>(0, w - 1)(rng);
    const std::uint32_t ry = std::uniform_int_distribution<std::uint32_t>(0, h - 1)(rng);
    const std::uint32_t rw = std::uniform_int_distribution<std::uint32_t>(1, w - rx)(rng);
    const std::uint32_t rh = std::uniform_int_distribution<std::uint32_t>(1, h - ry)(rng);
    for (const auto& roi : {RoiSpec::full(), RoiSpec::rect(rx, ry, rw, rh)}) {
      const std::uint32_t x0 = roi.full_frame ? 0 : roi.x, y0 = roi.full_frame ? 0 : roi.y;
      const std::uint32_t ww = roi.full_frame ? w : roi.w, hh = roi.full_frame ? h : roi.h;
      double want[3] = {0, 0, 0};
      for (std::uint32_t y = y0; y < y0 + hh; ++y) {
        for (std::uint32_t x = x0; x < x0 + ww; ++x) {
          for (int c = 0; c < 3; ++c) want[c] += f.pixels[3 * (y * w + x) + c];
        }
      }
      const auto got = frame_roi_mean(f, roi);
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(got[c], want[c] / (ww * hh), 1e-9);
    }
  }
}

TEST_F(Frames, AreaDownsampleMatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (auto [w, h, s] : std::vector<std::array<std::uint32_t, 3>>{{6, 6, 3}, {7, 5, 3}, {10, 4, 4}, {3, 3, 5}}) {
    auto f = random_frame(rng, w, h);
    const auto small = area_downsample(f, s);
    ASSERT_EQ(small.size(), 3ull * s * s);
    // Each output cell averages the source area it covers, weighting partial pixels.
    for (std::uint32_t oy = 0; oy < s; ++oy) {
      for (std::uint32_t ox = 0; ox < s; ++ox) {
        const double x0 = double(ox) * w / s, x1 = double(ox + 1) * w / s;
        const double y0 = double(oy) * h / s, y1 = double(oy + 1) * h / s;
        double acc[3] = {0, 0, 0}, area = 0;
        for (std::uint32_t y = 0; y < h; ++y) {
          const double wy = std::max(0.0, std::min<double>(y + 1, y1) - std::max<double>(y, y0));
          for (std::uint32_t x = 0; x < w; ++x) {
            const double wx = std::max(0.0, std::min<double>(x + 1, x1) - std::max<double>(x, x0));
            area += wx * wy;
            for (int c = 0; c < 3; ++c) acc[c] += wx * wy * f.pixels[3 * (y * w + x) + c];
          }
        }
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(small[3 * (oy * s + ox) + c], acc[c] / area, 1e-9);
      }
    }
  }
}

TEST_F(Frames, DownsampleThenMeanOnUniformFrame) {
  RgbFrame f{128, 128, {}};
  for (int i = 0; i < 128 * 128; ++i) f.pixels.insert(f.pixels.end(), {17, 101, 240});
  const auto direct = frame_roi_mean(f, RoiSpec::full());
  const auto down = frame_roi_mean(f, RoiSpec::full(), 36u);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(down[c], direct[c], 1e-12);
}

TEST_F(Frames, DumpOrderingAndConsistency) {
  std::mt19937_64 rng(6);
  std::vector<RgbFrame> frames;
  for (int i = 0; i < 12; ++i) frames.push_back(random_frame(rng, 6, 4));
  for (int i = 0; i < 12; ++i) write_frame(frames[i], dir_ / ("frame_" + std::to_string(i) + ".rgb8"));
  write("notes.txt", "ignored");
  auto files = list_frame_files(dir_);
  ASSERT_EQ(files.size(), 12u);
  EXPECT_EQ(files[2].filename(), "frame_2.rgb8");
  EXPECT_EQ(files[10].filename(), "frame_10.rgb8");
  auto t = read_frame_dump(dir_, RoiSpec::rect(1, 1, 3, 2), 25.0, std::nullopt, 4.0);
  EXPECT_EQ(t.t0_s(), 4.0);
  for (int i = 0; i < 12; ++i) {
    const auto m = frame_roi_mean(frames[i], RoiSpec::rect(1, 1, 3, 2));
    EXPECT_EQ(t.r()[i], m[0]);
    EXPECT_EQ(t.g()[i], m[1]);
    EXPECT_EQ(t.b()[i], m[2]);
  }

  write_frame(random_frame(rng, 5, 4), dir_ / "frame_12.rgb8");
  EXPECT_EQ(parse_error_of([&] { read_frame_dump(dir_, RoiSpec::full(), 25.0); }).kind(), ErrorKind::Parse);
  fs::remove(dir_ / "frame_12.rgb8");
  write_frame(frames[0], dir_ / "frame_007.rgb8");
  EXPECT_EQ(parse_error_of([&] { list_frame_files(dir_); }).kind(), ErrorKind::Parse);
  EXPECT_EQ(parse_error_of([&] { read_frame_dump(dir_ / "absent", RoiSpec::full(), 25.0); }).kind(), ErrorKind::Io);
}

using Manifest = TempDir;

namespace {
const char* kManifest = R"({
  "dataset_name": "demo",
  "recordings": [
    {"recording_id": "a", "participant_id": "p1", "scenario": {"lighting": "Dark", "hr_level": "LowHR"},
     "fps": 25, "trace_path": "a.csv", "gt_ppg_path": "a_ppg.csv", "gt_rate_hz": 100, "ppg_t0_s": -2},
    {"recording_id": "b", "participant_id": "p2", "scenario": "unlabeled", "fps": 30, "frames_path": "b",
     "roi": {"x": 1, "y": 2, "w": 3, "h": 4}, "downsample_to": 36, "gt_ppg_path": "b.csv", "gt_rate_hz": 60}
  ]
})";
}

TEST_F(Manifest, ParseAndRoundTrip) {
  auto m = parse_manifest(kManifest);
  EXPECT_EQ(m.dataset_name, "demo");
  ASSERT_EQ(m.recordings.size(), 2u);
  EXPECT_EQ(m.recordings[0].scenario, (ScenarioLabel{Lighting::Dark, HrLevel::LowHR}));
  EXPECT_EQ(m.recordings[0].ppg_t0_s, -2.0);
  EXPECT_FALSE(m.recordings[1].scenario.has_value());
  EXPECT_EQ(m.recordings[1].roi->w, 3u);
  EXPECT_EQ(m.recordings[1].downsample_to, 36u);
  write_manifest(m, dir_ / "m.json");
  auto back = read_manifest(dir_ / "m.json");
  EXPECT_EQ(manifest_to_string(back), manifest_to_string(m));
}

TEST_F(Manifest, SchemaViolations) {
  auto mutate = [](auto&& fn) {
    auto j = nlohmann::json::parse(kManifest);
    fn(j);
    return j.dump();
  };
  const std::vector<std::string> bad{
      mutate([](auto& j) { j["extra"] = 1; }),
      mutate([](auto& j) { j["recordings"][0]["colour"] = "x"; }),
      mutate([](auto& j) { j["recordings"][1]["recording_id"] = "a"; }),
      mutate([](auto& j) { j["recordings"][0]["fps"] = 0; }),
      mutate([](auto& j) { j["recordings"][0]["scenario"]["lighting"] = "Dim"; }),
      mutate([](auto& j) { j["recordings"][0]["scenario"] = "labeled"; }),
      mutate([](auto& j) { j["recordings"][0]["frames_path"] = "x"; }),
      mutate([](auto& j) { j["recordings"][0].erase("gt_ppg_path"); }),
      mutate([](auto& j) { j["recordings"][0]["gt_rate_hz"] = "100"; }),
      mutate([](auto& j) { j["recordings"][1]["roi"]["x"] = -1; }),
      mutate([](auto& j) { j["recordings"][0]["roi"] = "full-frame"; }),
      "{\"dataset_name\": \"x\"",
      "[]",
  };
  for (const auto& text : bad) EXPECT_EQ(parse_error_of([&] { parse_manifest(text); }).kind(), ErrorKind::Parse) << text;
  EXPECT_EQ(parse_error_of([&] { read_manifest(dir_ / "none.json"); }).kind(), ErrorKind::Io);
}

TEST_F(Manifest, LoadRecordingAppliesOffsetsAndChecksRates) {
  write("a.csv", "# fps=25\n# t0=1\n1,2,3\n4,5,6\n");
  write("a_ppg.csv", "# rate_hz=100\n# t0=0.5\n1\n2\n3\n");
  auto m = parse_manifest(kManifest);
  auto rec = load_recording(m.recordings[0], dir_);
  EXPECT_EQ(rec.trace.t0_s(), 1.0);
  EXPECT_EQ(rec.ppg.t0_s(), -1.5);
  m.recordings[0].gt_rate_hz = 50;
  EXPECT_EQ(parse_error_of([&] { load_recording(m.recordings[0], dir_); }).kind(), ErrorKind::Parse);
  m.recordings[0].gt_rate_hz = 100;
  m.recordings[0].fps = 30;
  EXPECT_EQ(parse_error_of([&] { load_recording(m.recordings[0], dir_); }).kind(), ErrorKind::Parse);
}

TEST(Align, IdenticalSpansUnchanged) {
  RgbTrace t(25, std::vector<double>(1500, 1), std::vector<double>(1500, 1), std::vector<double>(1500, 1));
  SampledSeries p(1000, std::vector<double>(59961, 0.0));  // same 59.96 s span
  auto [ta, pa] = align(t, p);
  EXPECT_EQ(ta.size(), 1500u);
  EXPECT_EQ(pa.size(), 59961u);
}

TEST(Align, EarlierPpgIsTrimmed) {
  RgbTrace t(25, std::vector<double>(1500, 1), std::vector<double>(1500, 1), std::vector<double>(1500, 1), 2.0);
  std::vector<double> v(61961);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  SampledSeries p(1000, v, 0.0);
  auto [ta, pa] = align(t, p);
  EXPECT_EQ(ta.size(), 1500u);
  EXPECT_EQ(pa.size(), 59961u);
  EXPECT_EQ(pa[0], 2000.0);
  EXPECT_NEAR(pa.t0_s(), ta.t0_s(), 1.0 / 25.0);
  // Never extrapolates: output spans lie inside both inputs.
  EXPECT_GE(pa.t0_s(), p.t0_s());
  EXPECT_LE(pa.time_at(pa.size() - 1), p.time_at(p.size() - 1) + 1e-12);
  EXPECT_LE(pa.time_at(pa.size() - 1), t.t0_s() + t.duration_s() + 1e-12);
}

TEST(Align, InsufficientOverlap) {
  RgbTrace t(25, std::vector<double>(500, 1), std::vector<double>(500, 1), std::vector<double>(500, 1));
  SampledSeries disjoint(100, std::vector<double>(3000, 0.0), 100.0);
  SampledSeries short_overlap(100, std::vector<double>(3000, 0.0), 15.0);
  EXPECT_THROW(align(t, disjoint), Error);
  EXPECT_THROW(align(t, short_overlap), Error);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(25.0), "25");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
