#include "rppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"
#include "parallel.hpp"
#include "rppg/error.hpp"

namespace rppg {

HrTrajectory HrTrajectory::constant(double bpm) { return HrTrajectory({{0.0, bpm}}); }

HrTrajectory HrTrajectory::linear(double t_start_s, double bpm_start, double t_end_s, double bpm_end) {
  return HrTrajectory({{t_start_s, bpm_start}, {t_end_s, bpm_end}});
}

HrTrajectory::HrTrajectory(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  require(!knots_.empty(), "HR trajectory needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require(std::isfinite(knots_[i].first) && std::isfinite(knots_[i].second), "HR trajectory knots must be finite");
    require(knots_[i].second > 0.0, "HR trajectory rates must be positive");
    if (i > 0) require(knots_[i].first > knots_[i - 1].first, "HR trajectory knot times must increase");
  }
}

double HrTrajectory::bpm_at(double t) const {
  if (t <= knots_.front().first) return knots_.front().second;
  if (t >= knots_.back().first) return knots_.back().second;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const std::pair<double, double>& k) { return v < k.first; });
  const auto& [t1, b1] = *it;
  const auto& [t0, b0] = *(it - 1);
  return b0 + (b1 - b0) * (t - t0) / (t1 - t0);
}

double HrTrajectory::cycles_at(double t) const {
  // Integral of bpm / 60 from the first knot to t; cycles(t) = G(t) - G(0).
  auto from_first_knot = [this](double x) {
    const double tf = knots_.front().first;
    if (x <= tf) return (x - tf) * knots_.front().second / 60.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      const auto& [ta, ba] = knots_[i];
      const auto& [tb, bb] = knots_[i + 1];
      if (x <= tb) return acc + (x - ta) * (ba + bpm_at(x)) / 120.0;
      acc += (tb - ta) * (ba + bb) / 120.0;
    }
    return acc + (x - knots_.back().first) * knots_.back().second / 60.0;
  };
  return from_first_knot(t) - from_first_knot(0.0);
}

double HrTrajectory::min_bpm() const {
  double m = knots_.front().second;
  for (const auto& k : knots_) m = std::min(m, k.second);
  return m;
}

double HrTrajectory::max_bpm() const {
  double m = knots_.front().second;
  for (const auto& k : knots_) m = std::max(m, k.second);
  return m;
}

SampledSeries pulse_waveform(const HrTrajectory& hr, double sample_rate_hz, double duration_s, double phase_rad) {
  if (hr.min_bpm() < kMinSynthBpm || hr.max_bpm() > kMaxSynthBpm) {
    fail(ErrorKind::InvalidArgument, "HR trajectory outside [40, 200] BPM");
  }
  require(sample_rate_hz > 0.0 && duration_s > 0.0, "pulse waveform needs positive rate and duration");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  require(n >= 2, "pulse waveform needs at least two samples");
  const double peak = 3.0 * std::sqrt(3.0) / 4.0;
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double p = 2.0 * std::numbers::pi * hr.cycles_at(static_cast<double>(k) / sample_rate_hz) + phase_rad;
    w[k] = (std::sin(p) + 0.5 * std::sin(2.0 * p)) / peak;
  }
  return SampledSeries(sample_rate_hz, std::move(w), 0.0);
}

void SynthConfig::validate() const {
  if (hr.min_bpm() < kMinSynthBpm || hr.max_bpm() > kMaxSynthBpm) {
    fail(ErrorKind::InvalidArgument, "synthetic HR outside [40, 200] BPM");
  }
  require(std::isfinite(duration_s) && duration_s > 0.0, "duration must be positive");
  require(std::isfinite(fps) && fps > 0.0, "fps must be positive");
  require(fps > 4.0 * hr.max_bpm() / 60.0, "fps too low to represent the pulse second harmonic");
  require(illumination_level > 0.0 && illumination_level <= 255.0, "illumination level must lie in (0, 255]");
  require(pulse_amplitude_frac >= 0.0, "pulse amplitude must be non-negative");
  require(specular_drift.amplitude_frac >= 0.0, "specular drift amplitude must be non-negative");
  require(specular_drift.freq_hz >= 0.0 && specular_drift.freq_hz <= 0.3, "specular drift frequency must lie in [0, 0.3] Hz");
  require(noise_std_pixels >= 0.0, "noise level must be non-negative");
  require(ppg_rate_hz >= 0.0, "PPG rate must be non-negative");
}

SynthConfig SynthConfig::noise_free() const {
  SynthConfig c = *this;
  c.noise_std_pixels = 0.0;
  c.quantize = false;
  return c;
}

SynthRecording skin_reflection_trace(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double pulse_phase = angle(rng);
  const double drift_phase = angle(rng);
  std::normal_distribution<double> noise(0.0, config.noise_std_pixels > 0.0 ? config.noise_std_pixels : 1.0);

  const SampledSeries w = pulse_waveform(config.hr, config.fps, config.duration_s, pulse_phase);
  const std::size_t n = w.size();

  double baseline = 0.0;
  for (double u : kDiffuseBaseline) baseline += kSpecularLevel + u;
  const double level_scale = config.illumination_level / (baseline / 3.0);

  std::array<std::vector<double>, 3> ch;
  for (auto& c : ch) c.resize(n);
  std::size_t clamped = 0;
  const double a = config.pulse_amplitude_frac;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / config.fps;
    const double s = config.specular_drift.amplitude_frac *
                     std::sin(2.0 * std::numbers::pi * config.specular_drift.freq_hz * t + drift_phase);
    for (std::size_t c = 0; c < 3; ++c) {
      double v = level_scale * (kSpecularLevel * (1.0 + s) + kDiffuseBaseline[c] + a * kPulsatileDirection[c] * w[k]);
      if (config.noise_std_pixels > 0.0) v += noise(rng);
      if (config.quantize) v = std::round(v);
      if (v < 0.0 || v > 255.0) {
        ++clamped;
        v = std::clamp(v, 0.0, 255.0);
      }
      ch[c][k] = v;
    }
  }
  const double clamp_rate = static_cast<double>(clamped) / static_cast<double>(3 * n);
  if (clamp_rate > kMaxClampRate) {
    fail(ErrorKind::InvalidArgument,
         "synthetic configuration clamps " + std::to_string(100.0 * clamp_rate) + "% of samples (limit 10%)");
  }

  const double ppg_rate = config.ppg_rate_hz > 0.0 ? config.ppg_rate_hz : config.fps;
  SampledSeries ppg = ppg_rate == config.fps ? w : pulse_waveform(config.hr, ppg_rate, config.duration_s, pulse_phase);
  return SynthRecording{RgbTrace(config.fps, std::move(ch[0]), std::move(ch[1]), std::move(ch[2]), 0.0),
                        std::move(ppg), clamp_rate};
}

ScenarioSpec ScenarioSpec::defaults(Lighting lighting, HrLevel level) {
  ScenarioSpec s;
  s.lighting = lighting;
  s.hr_level = level;
  s.hr_mean_bpm = level == HrLevel::LowHR ? 76.2 : 87.3;
  s.hr_sd_bpm = level == HrLevel::LowHR ? 8.0 : 14.0;
  s.illumination_level = lighting == Lighting::Bright ? kBrightLevel : kDarkLevel;
  return s;
}

std::vector<ScenarioSpec> default_scenarios() {
  std::vector<ScenarioSpec> out;
  for (const ScenarioLabel& l : kScenarioOrder) out.push_back(ScenarioSpec::defaults(l.lighting, l.hr_level));
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t recording_seed(std::uint64_t corpus_seed, int participant, std::size_t scenario_index) {
  const std::uint64_t key = (static_cast<std::uint64_t>(participant) << 8) | scenario_index;
  return splitmix64(splitmix64(corpus_seed) ^ splitmix64(key + 1));
}

double draw_corpus_hr(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.hr_sd_bpm == 0.0) return std::clamp(spec.hr_mean_bpm, kCorpusMinBpm, kCorpusMaxBpm);
  std::mt19937_64 rng(splitmix64(seed ^ 0x48524452415753ull));
  std::normal_distribution<double> hr(spec.hr_mean_bpm, spec.hr_sd_bpm);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double v = hr(rng);
    if (v >= kCorpusMinBpm && v <= kCorpusMaxBpm) return v;
  }
  fail(ErrorKind::InvalidArgument, "scenario HR distribution has no mass inside [54, 141] BPM");
}

Corpus scenario_corpus(const std::vector<ScenarioSpec>& specs, const CorpusOptions& options, const fs::path& out_dir) {
  require(options.participants >= 1, "corpus needs at least one participant");
  require(!specs.empty(), "corpus needs at least one scenario");
  std::set<ScenarioLabel> seen;
  for (const auto& s : specs) {
    require(seen.insert(s.label()).second, "duplicate scenario " + scenario_name(s.label()));
    require(s.hr_sd_bpm >= 0.0, "scenario HR sd must be non-negative");
  }

  std::error_code ec;
  fs::create_directories(out_dir / "traces", ec);
  if (!ec) fs::create_directories(out_dir / "ppg", ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  const int digits = std::max(2, static_cast<int>(std::to_string(options.participants).size()));
  const std::size_t count = static_cast<std::size_t>(options.participants) * specs.size();
  Corpus corpus;
  corpus.manifest.dataset_name = options.dataset_name;
  corpus.manifest.recordings.resize(count);
  corpus.entries.resize(count);

  detail::parallel_for(count, options.jobs, [&](std::size_t idx) {
    const int participant = static_cast<int>(idx / specs.size()) + 1;
    const std::size_t si = idx % specs.size();
    const ScenarioSpec& spec = specs[si];
    char pid[32];
    std::snprintf(pid, sizeof(pid), "p%0*d", digits, participant);
    const std::string rid = std::string(pid) + "_" + scenario_name(spec.label());

    const std::uint64_t seed = recording_seed(options.seed, participant, scenario_index(spec.label()));
    SynthConfig cfg = options.base;
    const double bpm = draw_corpus_hr(spec, seed);
    cfg.hr = HrTrajectory::constant(bpm);
    cfg.illumination_level = spec.illumination_level;
    cfg.seed = seed;
    const SynthRecording rec = skin_reflection_trace(cfg);

    Recording& r = corpus.manifest.recordings[idx];
    r.recording_id = rid;
    r.participant_id = pid;
    r.scenario = spec.label();
    r.fps = cfg.fps;
    r.trace_path = "traces/" + rid + ".csv";
    r.gt_ppg_path = "ppg/" + rid + ".csv";
    r.gt_rate_hz = rec.ppg.sample_rate_hz();
    write_trace_csv(rec.trace, out_dir / r.trace_path);
    write_ppg_csv(rec.ppg, out_dir / r.gt_ppg_path);

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (double v : rec.trace.channel(static_cast<Channel>(c))) total += v;
    }
    corpus.entries[idx] =
        CorpusEntry{rid, spec.label(), bpm, total / static_cast<double>(3 * rec.trace.size()), rec.clamp_rate};
  });

  write_manifest(corpus.manifest, out_dir / "manifest.json");
  return corpus;
}

std::vector<ScenarioSpec> parse_scenario_specs(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("scenario file is not valid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) fail(ErrorKind::Parse, "scenario file must be a non-empty JSON array");
  std::vector<ScenarioSpec> out;
  for (const json& item : j) {
    if (!item.is_object()) fail(ErrorKind::Parse, "scenario entries must be objects");
    for (const auto& [key, value] : item.items()) {
      static const std::set<std::string> allowed{"lighting", "hr_level", "hr_mean_bpm", "hr_sd_bpm",
                                                 "illumination_level"};
      if (allowed.count(key) == 0) fail(ErrorKind::Parse, "unknown scenario key '" + key + "'");
    }
    if (!item.contains("lighting") || !item["lighting"].is_string() || !item.contains("hr_level") ||
        !item["hr_level"].is_string()) {
      fail(ErrorKind::Parse, "scenario entries need string 'lighting' and 'hr_level'");
    }
    const auto light = parse_lighting(item["lighting"].get<std::string>());
    const auto level = parse_hr_level(item["hr_level"].get<std::string>());
    if (!light || !level) fail(ErrorKind::Parse, "unknown lighting or hr_level label");
    ScenarioSpec s = ScenarioSpec::defaults(*light, *level);
    auto number = [&](const char* key, double& dst) {
      if (!item.contains(key)) return;
      if (!item[key].is_number()) fail(ErrorKind::Parse, std::string("'") + key + "' must be a number");
      dst = item[key].get<double>();
    };
    number("hr_mean_bpm", s.hr_mean_bpm);
    number("hr_sd_bpm", s.hr_sd_bpm);
    number("illumination_level", s.illumination_level);
    out.push_back(s);
  }
  return out;
}

}  // namespace rppg
