#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "rppg/io.hpp"
#include "rppg/scenario.hpp"
#include "rppg/signal.hpp"

namespace rppg {

/// Heart rate over time as piecewise-linear knots (t_s, bpm); held constant
/// before the first and after the last knot.
class HrTrajectory {
 public:
  static HrTrajectory constant(double bpm);
  static HrTrajectory linear(double t_start_s, double bpm_start, double t_end_s, double bpm_end);
  explicit HrTrajectory(std::vector<std::pair<double, double>> knots);

  double bpm_at(double t_s) const;
  /// Integral of the instantaneous frequency in cycles from 0 to t_s.
  double cycles_at(double t_s) const;
  double min_bpm() const;
  double max_bpm() const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

inline constexpr double kMinSynthBpm = 40.0;
inline constexpr double kMaxSynthBpm = 200.0;

/// w(t) = (sin p + 0.5 sin 2p) / (3 sqrt(3) / 4), p = 2 pi cycles(t) + phase;
/// the divisor makes the peak exactly 1. Samples at t = k / rate, k < round(duration * rate).
SampledSeries pulse_waveform(const HrTrajectory& hr, double sample_rate_hz, double duration_s,
                             double phase_rad = 0.0);

struct SpecularDrift {
  double amplitude_frac = 0.02;
  double freq_hz = 0.1;  // <= 0.3
};

// Skin-reflection constants (R, G, B).
inline constexpr std::array<double, 3> kPulsatileDirection{0.33, 0.77, 0.53};
inline constexpr std::array<double, 3> kDiffuseBaseline{0.77, 0.51, 0.38};
inline constexpr double kSpecularLevel = 0.2;

inline constexpr double kBrightLevel = 129.7;
inline constexpr double kDarkLevel = 33.6;

struct SynthConfig {
  HrTrajectory hr = HrTrajectory::constant(75.0);
  double duration_s = 60.0;
  double fps = 25.0;
  double illumination_level = kBrightLevel;  // target mean pixel value
  double pulse_amplitude_frac = 0.005;
  SpecularDrift specular_drift;
  double noise_std_pixels = 0.2;
  bool quantize = true;
  std::uint64_t seed = 0;
  /// Rate of the returned PPG; 0 means the video frame rate.
  double ppg_rate_hz = 0.0;

  void validate() const;
  SynthConfig noise_free() const;
};

struct SynthRecording {
  RgbTrace trace;
  SampledSeries ppg;
  /// Fraction of channel samples clamped to [0, 255].
  double clamp_rate = 0.0;
};

inline constexpr double kMaxClampRate = 0.10;

/// C_i(t) = L [u_spec (1 + s(t)) + u_diff_i + a p_i w(t)] + n_i(t), L scaling the
/// mean to the illumination level; rounded when quantizing; clamped to [0, 255].
/// The pulse phase and drift phase are drawn from the seed.
SynthRecording skin_reflection_trace(const SynthConfig& config);

struct ScenarioSpec {
  Lighting lighting = Lighting::Bright;
  HrLevel hr_level = HrLevel::LowHR;
  double hr_mean_bpm = 76.2;
  double hr_sd_bpm = 8.0;
  double illumination_level = kBrightLevel;

  ScenarioLabel label() const { return {lighting, hr_level}; }
  static ScenarioSpec defaults(Lighting lighting, HrLevel level);
};

/// The four scenarios in report column order.
std::vector<ScenarioSpec> default_scenarios();

inline constexpr double kCorpusMinBpm = 54.0;
inline constexpr double kCorpusMaxBpm = 141.0;

struct CorpusOptions {
  int participants = 45;
  std::uint64_t seed = 0;
  /// Per-recording settings; hr, illumination_level and seed are overridden.
  SynthConfig base = [] {
    SynthConfig c;
    c.ppg_rate_hz = 1000.0;
    return c;
  }();
  std::string dataset_name = "synthetic";
  int jobs = 1;
};

struct CorpusEntry {
  std::string recording_id;
  ScenarioLabel scenario;
  double hr_bpm;
  double mean_pixel;
  double clamp_rate;
};

struct Corpus {
  DatasetManifest manifest;
  std::vector<CorpusEntry> entries;  // same order as manifest.recordings
};

/// HR for one participant x scenario: normal(mean, sd) truncated to [54, 141] by rejection.
double draw_corpus_hr(const ScenarioSpec& spec, std::uint64_t recording_seed);

/// Seed of recording (participant, scenario index) derived from the corpus seed.
std::uint64_t recording_seed(std::uint64_t corpus_seed, int participant, std::size_t scenario_index);

/// participants x scenarios recordings written under out_dir (traces/, ppg/,
/// manifest.json). Recordings are generated in parallel up to options.jobs.
Corpus scenario_corpus(const std::vector<ScenarioSpec>& specs, const CorpusOptions& options, const fs::path& out_dir);

/// Scenario list from JSON: [{"lighting", "hr_level", "hr_mean_bpm"?, "hr_sd_bpm"?,
/// "illumination_level"?}, ...]; omitted numbers take the label defaults.
std::vector<ScenarioSpec> parse_scenario_specs(const std::string& json_text);

}  // namespace rppg
