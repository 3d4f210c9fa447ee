#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rppg/scenario.hpp"
#include "rppg/signal.hpp"

namespace rppg {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV traces
//
//   # fps=<real>          (trace)      # rate_hz=<real>   (PPG)
//   # t0=<real>                        # t0=<real>
//   r,g,b                              value
//
// Readers reject anything else: unknown or repeated header keys, missing
// keys, ragged rows, non-numeric cells, CR line endings, blank lines.
// ---------------------------------------------------------------------------

RgbTrace read_trace_csv(const fs::path& path);
void write_trace_csv(const RgbTrace& trace, const fs::path& path);

SampledSeries read_ppg_csv(const fs::path& path);
void write_ppg_csv(const SampledSeries& ppg, const fs::path& path);

// ---------------------------------------------------------------------------
// Raw frame dumps: frame_<index>.rgb8 files, each "RGB8" + u32le width +
// u32le height + width*height interleaved 8-bit RGB pixels.
// ---------------------------------------------------------------------------

struct RoiSpec {
  std::uint32_t x = 0, y = 0, w = 0, h = 0;
  bool full_frame = true;

  static RoiSpec full() { return {}; }
  static RoiSpec rect(std::uint32_t x, std::uint32_t y, std::uint32_t w, std::uint32_t h) {
    return {x, y, w, h, false};
  }
};

struct RgbFrame {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3
};

RgbFrame read_frame(const fs::path& path);
void write_frame(const RgbFrame& frame, const fs::path& path);

/// Mean RGB over the ROI of one frame; with `downsample_to`, the frame is first
/// area-averaged to that square size and the ROI refers to the small frame.
std::array<double, 3> frame_roi_mean(const RgbFrame& frame, const RoiSpec& roi,
                                     std::optional<std::uint32_t> downsample_to = std::nullopt);

/// Area-average resample of a frame to size x size (channel-interleaved doubles).
std::vector<double> area_downsample(const RgbFrame& frame, std::uint32_t size);

/// Frame files sorted by numeric index.
std::vector<fs::path> list_frame_files(const fs::path& dir);

RgbTrace read_frame_dump(const fs::path& dir, const RoiSpec& roi, double fps,
                         std::optional<std::uint32_t> downsample_to = std::nullopt, double t0_s = 0.0);

// ---------------------------------------------------------------------------
// Dataset manifests (JSON, field names below, unknown keys rejected)
// ---------------------------------------------------------------------------

struct Recording {
  std::string recording_id;
  std::string participant_id;
  std::optional<ScenarioLabel> scenario;  // nullopt = "unlabeled"
  double fps = 0.0;
  std::string trace_path;   // exactly one of trace_path / frames_path
  std::string frames_path;
  std::optional<RoiSpec> roi;
  std::optional<std::uint32_t> downsample_to;
  std::string gt_ppg_path;
  double gt_rate_hz = 0.0;
  double trace_t0_s = 0.0;  // added to the trace file's own t0
  double ppg_t0_s = 0.0;    // added to the PPG file's own t0
};

struct DatasetManifest {
  std::string dataset_name;
  std::vector<Recording> recordings;
};

/// Throws ErrorKind::Parse on malformed JSON or schema violations.
DatasetManifest parse_manifest(const std::string& json_text);
/// Pretty-printed JSON with a trailing newline.
std::string manifest_to_string(const DatasetManifest& m);
/// Throws ErrorKind::Io / Parse.
DatasetManifest read_manifest(const fs::path& path);
void write_manifest(const DatasetManifest& m, const fs::path& path);

struct LoadedRecording {
  RgbTrace trace;
  SampledSeries ppg;
};

/// Reads the trace (or frames) and PPG named by a recording, relative paths
/// resolved against `base_dir`; file rates must agree with the manifest.
LoadedRecording load_recording(const Recording& rec, const fs::path& base_dir);

// ---------------------------------------------------------------------------
// Time alignment
// ---------------------------------------------------------------------------

inline constexpr double kMinAlignedOverlapS = 10.0;

/// Trims both streams to their common time span (never extrapolates).
std::pair<RgbTrace, SampledSeries> align(const RgbTrace& trace, const SampledSeries& ppg);

/// Writes `content` to `path` through a temporary file in the same directory.
void write_text_file(const fs::path& path, const std::string& content);
std::string read_text_file(const fs::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace rppg
