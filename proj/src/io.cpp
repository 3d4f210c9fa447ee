#include "rppg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "rppg/error.hpp"
#include "rppg/simd.hpp"

namespace rppg {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "error reading " + path.string());
  return std::move(ss).str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::Io, "error writing " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot write " + path.string() + ": " + ec.message());
}

namespace {

// ---------------------------------------------------------------------------
// CSV

struct CsvContent {
  std::map<std::string, double, std::less<>> header;
  std::vector<double> cells;  // row-major
  std::size_t rows = 0;
};

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
  fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line) + ": " + what);
}

bool parse_real(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

CsvContent parse_csv(const fs::path& path, const std::string& text, std::size_t columns,
                     const std::vector<std::string_view>& header_keys) {
  CsvContent out;
  std::size_t pos = 0, line_no = 0;
  bool in_header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find('\r') != std::string_view::npos) parse_error(path, line_no, "CR line ending");
    if (line.empty()) parse_error(path, line_no, "blank line");

    if (line.front() == '#') {
      if (!in_header) parse_error(path, line_no, "header line after data rows");
      std::string_view body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) parse_error(path, line_no, "malformed header, expected key=value");
      const std::string_view key = body.substr(0, eq);
      if (std::find(header_keys.begin(), header_keys.end(), key) == header_keys.end()) {
        parse_error(path, line_no, "unknown header key '" + std::string(key) + "'");
      }
      if (out.header.count(key) != 0) parse_error(path, line_no, "repeated header key '" + std::string(key) + "'");
      double v = 0.0;
      if (!parse_real(body.substr(eq + 1), v)) parse_error(path, line_no, "non-numeric header value");
      out.header.emplace(std::string(key), v);
      continue;
    }
    in_header = false;

    const auto found = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (found != columns) {
      parse_error(path, line_no,
                  "expected " + std::to_string(columns) + " columns, found " + std::to_string(found));
    }
    std::size_t start = 0;
    for (std::size_t col = 0; col < columns; ++col) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      const std::string_view cell = line.substr(start, comma - start);
      double v = 0.0;
      if (!parse_real(cell, v)) parse_error(path, line_no, "non-numeric cell '" + std::string(cell) + "'");
      out.cells.push_back(v);
      start = comma + 1;
    }
    ++out.rows;
  }
  for (std::string_view key : header_keys) {
    if (out.header.find(key) == out.header.end()) {
      fail(ErrorKind::Parse, path.string() + ": missing header '# " + std::string(key) + "='");
    }
  }
  return out;
}

}  // namespace

RgbTrace read_trace_csv(const fs::path& path) {
  const CsvContent csv = parse_csv(path, read_text_file(path), 3, {"fps", "t0"});
  const double fps = csv.header.at("fps");
  if (!(fps > 0.0)) fail(ErrorKind::Parse, path.string() + ": fps must be positive");
  if (csv.rows < 2) fail(ErrorKind::Parse, path.string() + ": trace needs at least two rows");
  std::vector<double> r(csv.rows), g(csv.rows), b(csv.rows);
  for (std::size_t i = 0; i < csv.rows; ++i) {
    r[i] = csv.cells[3 * i];
    g[i] = csv.cells[3 * i + 1];
    b[i] = csv.cells[3 * i + 2];
    for (int c = 0; c < 3; ++c) {
      const double v = csv.cells[3 * i + static_cast<std::size_t>(c)];
      if (!(v >= 0.0 && v <= 255.0)) {
        fail(ErrorKind::Parse, path.string() + ": data row " + std::to_string(i + 1) + " value outside [0, 255]");
      }
    }
  }
  return RgbTrace(fps, std::move(r), std::move(g), std::move(b), csv.header.at("t0"));
}

void write_trace_csv(const RgbTrace& trace, const fs::path& path) {
  std::string out = "# fps=" + format_double(trace.sample_rate_hz()) + "\n# t0=" + format_double(trace.t0_s()) + "\n";
  out.reserve(out.size() + trace.size() * 60);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_double(trace.r()[i]);
    out += ',';
    out += format_double(trace.g()[i]);
    out += ',';
    out += format_double(trace.b()[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

SampledSeries read_ppg_csv(const fs::path& path) {
  const CsvContent csv = parse_csv(path, read_text_file(path), 1, {"rate_hz", "t0"});
  const double rate = csv.header.at("rate_hz");
  if (!(rate > 0.0)) fail(ErrorKind::Parse, path.string() + ": rate_hz must be positive");
  if (csv.rows == 0) fail(ErrorKind::Parse, path.string() + ": no data rows");
  return SampledSeries(rate, csv.cells, csv.header.at("t0"));
}

void write_ppg_csv(const SampledSeries& ppg, const fs::path& path) {
  std::string out = "# rate_hz=" + format_double(ppg.sample_rate_hz()) + "\n# t0=" + format_double(ppg.t0_s()) + "\n";
  out.reserve(out.size() + ppg.size() * 24);
  for (double v : ppg.values()) {
    out += format_double(v);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Frames

namespace {

constexpr std::size_t kFrameHeaderBytes = 12;

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

RgbFrame read_frame(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < kFrameHeaderBytes) fail(ErrorKind::Parse, path.string() + ": truncated frame header");
  if (bytes.compare(0, 4, "RGB8") != 0) fail(ErrorKind::Parse, path.string() + ": bad magic, expected RGB8");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  RgbFrame f;
  f.width = read_u32le(raw + 4);
  f.height = read_u32le(raw + 8);
  if (f.width == 0 || f.height == 0) fail(ErrorKind::Parse, path.string() + ": zero frame dimension");
  const std::uint64_t expected = kFrameHeaderBytes + 3ull * f.width * f.height;
  if (bytes.size() < expected) fail(ErrorKind::Parse, path.string() + ": truncated pixel data");
  if (bytes.size() > expected) fail(ErrorKind::Parse, path.string() + ": trailing bytes after pixel data");
  f.pixels.assign(raw + kFrameHeaderBytes, raw + expected);
  return f;
}

void write_frame(const RgbFrame& frame, const fs::path& path) {
  require(frame.pixels.size() == 3ull * frame.width * frame.height, "frame pixel buffer does not match its size");
  std::string out = "RGB8";
  put_u32le(out, frame.width);
  put_u32le(out, frame.height);
  out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  write_text_file(path, out);
}

namespace {

// Per output cell, the (source index, weight) pairs of an area average.
std::vector<std::vector<std::pair<std::uint32_t, double>>> area_weights(std::uint32_t src, std::uint32_t dst) {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::uint32_t o = 0; o < dst; ++o) {
    const double lo = o * scale, hi = (o + 1) * scale;
    for (auto i = static_cast<std::uint32_t>(std::floor(lo)); i < src && i < hi; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) out[o].emplace_back(i, overlap / scale);
    }
  }
  return out;
}

void check_roi(const RoiSpec& roi, std::uint32_t width, std::uint32_t height) {
  if (roi.full_frame) return;
  if (roi.w == 0 || roi.h == 0 || static_cast<std::uint64_t>(roi.x) + roi.w > width ||
      static_cast<std::uint64_t>(roi.y) + roi.h > height) {
    fail(ErrorKind::InvalidArgument, "ROI (" + std::to_string(roi.x) + "," + std::to_string(roi.y) + "," +
                                         std::to_string(roi.w) + "," + std::to_string(roi.h) +
                                         ") outside frame " + std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

std::vector<double> area_downsample(const RgbFrame& frame, std::uint32_t size) {
  require(size >= 1, "downsample size must be positive");
  const auto wx = area_weights(frame.width, size);
  const auto wy = area_weights(frame.height, size);
  // horizontal pass: height x size x 3
  std::vector<double> tmp(static_cast<std::size_t>(frame.height) * size * 3, 0.0);
  for (std::uint32_t y = 0; y < frame.height; ++y) {
    const std::uint8_t* row = frame.pixels.data() + static_cast<std::size_t>(y) * frame.width * 3;
    for (std::uint32_t o = 0; o < size; ++o) {
      double* dst = &tmp[(static_cast<std::size_t>(y) * size + o) * 3];
      for (const auto& [i, w] : wx[o]) {
        for (int c = 0; c < 3; ++c) dst[c] += w * row[3 * i + static_cast<std::uint32_t>(c)];
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(size) * size * 3, 0.0);
  for (std::uint32_t oy = 0; oy < size; ++oy) {
    for (const auto& [y, w] : wy[oy]) {
      const double* src = &tmp[static_cast<std::size_t>(y) * size * 3];
      double* dst = &out[static_cast<std::size_t>(oy) * size * 3];
      for (std::size_t j = 0; j < static_cast<std::size_t>(size) * 3; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

std::array<double, 3> frame_roi_mean(const RgbFrame& frame, const RoiSpec& roi,
                                     std::optional<std::uint32_t> downsample_to) {
  if (downsample_to) {
    const std::uint32_t s = *downsample_to;
    check_roi(roi, s, s);
    const auto small = area_downsample(frame, s);
    const RoiSpec r = roi.full_frame ? RoiSpec::rect(0, 0, s, s) : roi;
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    for (std::uint32_t y = r.y; y < r.y + r.h; ++y)
      for (std::uint32_t x = r.x; x < r.x + r.w; ++x)
        for (int c = 0; c < 3; ++c) acc[c] += small[(static_cast<std::size_t>(y) * s + x) * 3 + c];
    const double count = static_cast<double>(r.w) * r.h;
    return {acc[0] / count, acc[1] / count, acc[2] / count};
  }

  check_roi(roi, frame.width, frame.height);
  const auto& k = simd::kernels();
  std::uint64_t sums[3] = {0, 0, 0};
  double count = 0.0;
  if (roi.full_frame) {
    k.sum_rgb8(frame.pixels.data(), static_cast<std::size_t>(frame.width) * frame.height, sums);
    count = static_cast<double>(frame.width) * frame.height;
  } else {
    for (std::uint32_t y = roi.y; y < roi.y + roi.h; ++y) {
      k.sum_rgb8(frame.pixels.data() + (static_cast<std::size_t>(y) * frame.width + roi.x) * 3, roi.w, sums);
    }
    count = static_cast<double>(roi.w) * roi.h;
  }
  return {static_cast<double>(sums[0]) / count, static_cast<double>(sums[1]) / count,
          static_cast<double>(sums[2]) / count};
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::Io, "frame directory not found: " + dir.string());
  static const std::regex pattern(R"(frame_(\d+)\.rgb8)");
  std::map<unsigned long long, fs::path> by_index;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    const auto idx = std::stoull(m[1].str());
    if (!by_index.emplace(idx, entry.path()).second) {
      fail(ErrorKind::Parse, dir.string() + ": duplicate frame index " + std::to_string(idx));
    }
  }
  std::vector<fs::path> out;
  for (auto& [idx, p] : by_index) out.push_back(p);
  return out;
}

RgbTrace read_frame_dump(const fs::path& dir, const RoiSpec& roi, double fps,
                         std::optional<std::uint32_t> downsample_to, double t0_s) {
  const auto files = list_frame_files(dir);
  if (files.size() < 2) fail(ErrorKind::Parse, dir.string() + ": need at least two frame files");
  std::vector<double> r, g, b;
  r.reserve(files.size());
  g.reserve(files.size());
  b.reserve(files.size());
  std::uint32_t width = 0, height = 0;
  for (const auto& f : files) {
    const RgbFrame frame = read_frame(f);
    if (width == 0) {
      width = frame.width;
      height = frame.height;
    } else if (frame.width != width || frame.height != height) {
      fail(ErrorKind::Parse, f.string() + ": frame is " + std::to_string(frame.width) + "x" +
                                 std::to_string(frame.height) + ", expected " + std::to_string(width) + "x" +
                                 std::to_string(height));
    }
    const auto m = frame_roi_mean(frame, roi, downsample_to);
    r.push_back(m[0]);
    g.push_back(m[1]);
    b.push_back(m[2]);
  }
  return RgbTrace(fps, std::move(r), std::move(g), std::move(b), t0_s);
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, "manifest " + where + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) schema_error(where, "unknown key '" + key + "'");
  }
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, "missing key '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) schema_error(where, "'" + key + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number()) schema_error(where, "'" + key + "' must be a number");
  return v.get<double>();
}

std::uint32_t uint_field(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number_unsigned()) schema_error(where, "'" + key + "' must be a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x > 0xFFFFFFFFull) schema_error(where, "'" + key + "' too large");
  return static_cast<std::uint32_t>(x);
}

Recording parse_recording(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "recording must be an object");
  reject_unknown_keys(j,
                      {"recording_id", "participant_id", "scenario", "fps", "trace_path", "frames_path", "roi",
                       "downsample_to", "gt_ppg_path", "gt_rate_hz", "trace_t0_s", "ppg_t0_s"},
                      where);
  Recording r;
  r.recording_id = string_field(j, "recording_id", where);
  r.participant_id = string_field(j, "participant_id", where);
  if (r.recording_id.empty() || r.participant_id.empty()) schema_error(where, "ids must be non-empty");

  const json& sc = field(j, "scenario", where);
  if (sc.is_string()) {
    if (sc.get<std::string>() != "unlabeled") schema_error(where, "scenario string must be \"unlabeled\"");
  } else if (sc.is_object()) {
    reject_unknown_keys(sc, {"lighting", "hr_level"}, where + ".scenario");
    const auto light = parse_lighting(string_field(sc, "lighting", where + ".scenario"));
    const auto level = parse_hr_level(string_field(sc, "hr_level", where + ".scenario"));
    if (!light) schema_error(where, "lighting must be Bright or Dark");
    if (!level) schema_error(where, "hr_level must be LowHR or HighHR");
    r.scenario = ScenarioLabel{*light, *level};
  } else {
    schema_error(where, "scenario must be an object or \"unlabeled\"");
  }

  r.fps = number_field(field(j, "fps", where), "fps", where);
  r.gt_rate_hz = number_field(field(j, "gt_rate_hz", where), "gt_rate_hz", where);
  if (!(r.fps > 0.0) || !(r.gt_rate_hz > 0.0)) schema_error(where, "fps and gt_rate_hz must be positive");
  r.gt_ppg_path = string_field(j, "gt_ppg_path", where);

  const bool has_trace = j.contains("trace_path"), has_frames = j.contains("frames_path");
  if (has_trace == has_frames) schema_error(where, "exactly one of trace_path / frames_path is required");
  if (has_trace) r.trace_path = string_field(j, "trace_path", where);
  if (has_frames) r.frames_path = string_field(j, "frames_path", where);
  if (j.contains("roi")) {
    if (!has_frames) schema_error(where, "roi only applies to frames_path recordings");
    const json& roi = j["roi"];
    if (roi.is_string() && roi.get<std::string>() == "full-frame") {
      r.roi = RoiSpec::full();
    } else if (roi.is_object()) {
      reject_unknown_keys(roi, {"x", "y", "w", "h"}, where + ".roi");
      r.roi = RoiSpec::rect(uint_field(field(roi, "x", where), "x", where), uint_field(field(roi, "y", where), "y", where),
                            uint_field(field(roi, "w", where), "w", where), uint_field(field(roi, "h", where), "h", where));
    } else {
      schema_error(where, "roi must be \"full-frame\" or {x, y, w, h}");
    }
  }
  if (j.contains("downsample_to")) {
    if (!has_frames) schema_error(where, "downsample_to only applies to frames_path recordings");
    r.downsample_to = uint_field(j["downsample_to"], "downsample_to", where);
    if (*r.downsample_to == 0) schema_error(where, "downsample_to must be positive");
  }
  if (j.contains("trace_t0_s")) r.trace_t0_s = number_field(j["trace_t0_s"], "trace_t0_s", where);
  if (j.contains("ppg_t0_s")) r.ppg_t0_s = number_field(j["ppg_t0_s"], "ppg_t0_s", where);
  return r;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error("root", "must be an object");
  reject_unknown_keys(j, {"dataset_name", "recordings"}, "root");
  DatasetManifest m;
  m.dataset_name = string_field(j, "dataset_name", "root");
  const json& recs = field(j, "recordings", "root");
  if (!recs.is_array()) schema_error("root", "'recordings' must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    Recording r = parse_recording(recs[i], "recordings[" + std::to_string(i) + "]");
    if (!ids.insert(r.recording_id).second) schema_error("recordings", "duplicate recording_id '" + r.recording_id + "'");
    m.recordings.push_back(std::move(r));
  }
  return m;
}

std::string manifest_to_string(const DatasetManifest& m) {
  ordered_json recs = ordered_json::array();
  for (const Recording& r : m.recordings) {
    ordered_json j;
    j["recording_id"] = r.recording_id;
    j["participant_id"] = r.participant_id;
    if (r.scenario) {
      j["scenario"] = {{"lighting", lighting_name(r.scenario->lighting)},
                       {"hr_level", hr_level_name(r.scenario->hr_level)}};
    } else {
      j["scenario"] = "unlabeled";
    }
    j["fps"] = r.fps;
    if (!r.frames_path.empty()) {
      j["frames_path"] = r.frames_path;
      if (r.roi) {
        if (r.roi->full_frame) {
          j["roi"] = "full-frame";
        } else {
          j["roi"] = {{"x", r.roi->x}, {"y", r.roi->y}, {"w", r.roi->w}, {"h", r.roi->h}};
        }
      }
      if (r.downsample_to) j["downsample_to"] = *r.downsample_to;
    } else {
      j["trace_path"] = r.trace_path;
    }
    j["gt_ppg_path"] = r.gt_ppg_path;
    j["gt_rate_hz"] = r.gt_rate_hz;
    j["trace_t0_s"] = r.trace_t0_s;
    j["ppg_t0_s"] = r.ppg_t0_s;
    recs.push_back(std::move(j));
  }
  ordered_json root;
  root["dataset_name"] = m.dataset_name;
  root["recordings"] = std::move(recs);
  return root.dump(2) + "\n";
}

DatasetManifest read_manifest(const fs::path& path) { return parse_manifest(read_text_file(path)); }

void write_manifest(const DatasetManifest& m, const fs::path& path) { write_text_file(path, manifest_to_string(m)); }

namespace {

fs::path resolve(const std::string& p, const fs::path& base) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

LoadedRecording load_recording(const Recording& rec, const fs::path& base_dir) {
  std::optional<RgbTrace> trace;
  if (!rec.trace_path.empty()) {
    const RgbTrace t = read_trace_csv(resolve(rec.trace_path, base_dir));
    if (!same_rate(t.sample_rate_hz(), rec.fps)) {
      fail(ErrorKind::Parse, rec.recording_id + ": trace fps " + format_double(t.sample_rate_hz()) +
                                 " disagrees with manifest fps " + format_double(rec.fps));
    }
    trace.emplace(t.sample_rate_hz(), std::vector<double>(t.r().begin(), t.r().end()),
                  std::vector<double>(t.g().begin(), t.g().end()), std::vector<double>(t.b().begin(), t.b().end()),
                  t.t0_s() + rec.trace_t0_s);
  } else {
    trace.emplace(read_frame_dump(resolve(rec.frames_path, base_dir), rec.roi.value_or(RoiSpec::full()), rec.fps,
                                  rec.downsample_to, rec.trace_t0_s));
  }
  const SampledSeries p = read_ppg_csv(resolve(rec.gt_ppg_path, base_dir));
  if (!same_rate(p.sample_rate_hz(), rec.gt_rate_hz)) {
    fail(ErrorKind::Parse, rec.recording_id + ": PPG rate " + format_double(p.sample_rate_hz()) +
                               " disagrees with manifest gt_rate_hz " + format_double(rec.gt_rate_hz));
  }
  SampledSeries ppg(p.sample_rate_hz(), std::vector<double>(p.values().begin(), p.values().end()),
                    p.t0_s() + rec.ppg_t0_s);
  return LoadedRecording{std::move(*trace), std::move(ppg)};
}

std::pair<RgbTrace, SampledSeries> align(const RgbTrace& trace, const SampledSeries& ppg) {
  const double start = std::max(trace.t0_s(), ppg.t0_s());
  const double end = std::min(trace.t0_s() + trace.duration_s(), ppg.t0_s() + ppg.duration_s());
  if (!(end - start >= kMinAlignedOverlapS - 1e-9)) {
    fail(ErrorKind::InvalidArgument, "trace and PPG overlap for " + format_double(std::max(0.0, end - start)) +
                                         " s, need at least " + format_double(kMinAlignedOverlapS) + " s");
  }
  // Index range [first, last] of samples inside [start, end].
  auto span_of = [&](double t0, double rate, std::size_t n) {
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((start - t0) * rate - 1e-9)));
    const auto last = std::min(n - 1, static_cast<std::size_t>(std::floor((end - t0) * rate + 1e-9)));
    return std::pair{first, last - first + 1};
  };
  const auto [tf, tn] = span_of(trace.t0_s(), trace.sample_rate_hz(), trace.size());
  const auto [pf, pn] = span_of(ppg.t0_s(), ppg.sample_rate_hz(), ppg.size());
  const auto v = ppg.values();
  SampledSeries ppg_out(ppg.sample_rate_hz(),
                        std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(pf),
                                            v.begin() + static_cast<std::ptrdiff_t>(pf + pn)),
                        ppg.time_at(pf));
  return {trace.slice(tf, tn), std::move(ppg_out)};
}

}  // namespace rppg
