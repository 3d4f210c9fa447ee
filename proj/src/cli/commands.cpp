#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rppg/cli.hpp"
#include "rppg/error.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io.hpp"
#include "rppg/methods.hpp"
#include "rppg/synth.hpp"

namespace rppg::cli {
namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Options shared by estimate and evaluate.
struct PipelineFlags {
  std::vector<std::string> methods{"all"};
  std::string band;
  double welch_seg_s = WelchOptions{}.seg_len_s;
  double welch_overlap = WelchOptions{}.overlap_frac;
  double pos_window_s = MethodConfig{}.pos_window_s;
  std::uint64_t ica_seed = 0;
  int ica_max_iter = MethodConfig{}.ica_max_iter;
  double ica_tol = MethodConfig{}.ica_tol;
  int jobs = 1;

  void attach(CLI::App& cmd) {
    cmd.add_option("--method", methods, "GREEN, CHROM, POS, ICA or all (repeatable, comma separated)")
        ->delimiter(',');
    cmd.add_option("--band", band, "HR band in Hz as lo:hi (default 0.6:3.0)");
    cmd.add_option("--welch-seg", welch_seg_s, "Welch segment length in seconds");
    cmd.add_option("--welch-overlap", welch_overlap, "Welch segment overlap fraction in [0, 1)");
    cmd.add_option("--pos-window", pos_window_s, "POS window length in seconds");
    cmd.add_option("--ica-seed", ica_seed, "FastICA initialisation seed");
    cmd.add_option("--ica-iters", ica_max_iter, "FastICA iteration limit per component");
    cmd.add_option("--ica-tol", ica_tol, "FastICA convergence tolerance");
    cmd.add_option("--jobs", jobs, "worker threads");
  }

  std::vector<MethodId> method_list() const {
    std::set<MethodId> chosen;
    for (const auto& name : methods) {
      if (name == "all" || name == "ALL") {
        chosen.insert(kAllMethods.begin(), kAllMethods.end());
        continue;
      }
      auto m = parse_method(name);
      if (!m) fail(ErrorKind::InvalidArgument, "unknown method '" + name + "'");
      chosen.insert(*m);
    }
    require(!chosen.empty(), "no method selected");
    return {chosen.begin(), chosen.end()};
  }

  EvalConfig config() const {
    EvalConfig cfg;
    if (!band.empty()) {
      const auto colon = band.find(':');
      require(colon != std::string::npos, "--band expects lo:hi, got '" + band + "'");
      try {
        std::size_t used = 0;
        cfg.hr.band.low_hz = std::stod(band.substr(0, colon), &used);
        require(used == colon, "bad --band value '" + band + "'");
        const std::string hi = band.substr(colon + 1);
        cfg.hr.band.high_hz = std::stod(hi, &used);
        require(used == hi.size(), "bad --band value '" + band + "'");
      } catch (const std::logic_error&) {
        fail(ErrorKind::InvalidArgument, "bad --band value '" + band + "'");
      }
    }
    cfg.hr.welch.seg_len_s = welch_seg_s;
    cfg.hr.welch.overlap_frac = welch_overlap;
    cfg.method.pos_window_s = pos_window_s;
    cfg.method.ica_seed = ica_seed;
    cfg.method.ica_max_iter = ica_max_iter;
    cfg.method.ica_tol = ica_tol;
    cfg.method.band = cfg.hr.band;
    cfg.method.welch = cfg.hr.welch;
    cfg.jobs = jobs;
    cfg.validate();
    return cfg;
  }
};

RoiSpec parse_roi(const std::string& text) {
  if (text.empty() || text == "full") return RoiSpec::full();
  unsigned x = 0, y = 0, w = 0, h = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%u,%u,%u,%u%c", &x, &y, &w, &h, &tail) != 4 || w == 0 || h == 0) {
    fail(ErrorKind::InvalidArgument, "--roi expects x,y,w,h with positive w and h, got '" + text + "'");
  }
  return RoiSpec::rect(x, y, w, h);
}

std::string psd_csv(const PsdEstimate& psd) {
  std::string s = "freq_hz,density\n";
  for (std::size_t i = 0; i < psd.freqs_hz.size(); ++i) {
    s += format_double(psd.freqs_hz[i]) + "," + format_double(psd.density[i]) + "\n";
  }
  return s;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory " + dir.string());
}

// --------------------------------------------------------------------------

struct EstimateArgs {
  PipelineFlags pipeline;
  std::string input;
  double fps = 0.0;
  std::string roi;
  std::uint32_t downsample = 0;
  std::string out_dir;
  bool plot = false;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const auto methods = a.pipeline.method_list();
  const EvalConfig cfg = a.pipeline.config();
  const RoiSpec roi = parse_roi(a.roi);

  const fs::path input(a.input);
  if (!fs::exists(input)) fail(ErrorKind::Io, "no such file or directory: " + input.string());
  RgbTrace trace = [&] {
    if (fs::is_directory(input)) {
      require(a.fps > 0.0, "--fps is required for a frame directory");
      std::optional<std::uint32_t> ds;
      if (a.downsample > 0) ds = a.downsample;
      return read_frame_dump(input, roi, a.fps, ds);
    }
    RgbTrace t = read_trace_csv(input);
    if (a.fps > 0.0 && std::abs(a.fps - t.sample_rate_hz()) > 1e-9) {
      fail(ErrorKind::InvalidArgument, "--fps " + format_double(a.fps) + " disagrees with the file's fps " +
                                           format_double(t.sample_rate_hz()));
    }
    return t;
  }();
  cfg.hr.band.validate_for_rate(trace.sample_rate_hz());

  const bool write_files = !a.out_dir.empty() || a.plot;
  const fs::path out_dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  if (write_files) ensure_dir(out_dir);

  int status = kExitOk;
  for (MethodId m : methods) {
    const std::string name(method_name(m));
    try {
      const PulseSignal pulse = run_method(m, trace, cfg.method);
      const PulseAnalysis res = analyze_pulse(pulse.signal, cfg.hr);
      out << name << " " << fixed(res.hr.bpm) << " BPM  SNR " << fixed(res.hr.snr_db, 1) << " dB\n";
      if (!a.out_dir.empty()) write_text_file(out_dir / ("psd_" + name + ".csv"), psd_csv(res.psd));
      if (a.plot) write_text_file(out_dir / ("plot_" + name + ".svg"), render_svg(res.filtered, res.psd, res.hr, name));
    } catch (const Error& e) {
      err << name << ": " << e.what() << "\n";
      const int code = e.kind() == ErrorKind::Numerical ? kExitNumericalError : kExitInputError;
      status = std::max(status, code);
    }
  }
  return status;
}

// --------------------------------------------------------------------------

struct EvaluateArgs {
  PipelineFlags pipeline;
  std::string manifest;
  int folds = 10;
  std::uint64_t split_seed = 0;
  std::string out_dir;
};

std::string summary_table(const std::vector<EvalReport>& reports, bool with_scenarios) {
  std::vector<std::string> header{"method"};
  if (with_scenarios) {
    for (ScenarioLabel s : kScenarioOrder) header.push_back(scenario_name(s));
  }
  header.insert(header.end(), {"ALL", "SE", "n", "excluded"});
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    std::vector<std::string> row{r.method};
    if (with_scenarios) {
      for (ScenarioLabel s : kScenarioOrder) {
        auto it = std::find_if(r.per_scenario.begin(), r.per_scenario.end(),
                               [&](const auto& p) { return p.first == s; });
        row.push_back(it == r.per_scenario.end() ? "-" : fixed(it->second.mae));
      }
    }
    row.push_back(r.overall ? fixed(r.overall->mae) : "-");
    row.push_back(r.overall && r.overall->se ? fixed(*r.overall->se) : "-");
    row.push_back(std::to_string(r.overall ? r.overall->n : 0));
    row.push_back(std::to_string(r.excluded));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string s;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        s += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        s += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    s += "\n";
  }
  return s;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto methods = a.pipeline.method_list();
  const EvalConfig cfg = a.pipeline.config();
  require(a.folds >= 0, "--folds must be >= 0");

  const fs::path manifest_path(a.manifest);
  const DatasetManifest manifest = read_manifest(manifest_path);
  require(!manifest.recordings.empty(), "manifest lists no recordings: " + manifest_path.string());

  std::optional<FoldPlan> plan;
  if (a.folds > 0) {
    std::vector<std::string> ids;
    for (const auto& r : manifest.recordings) ids.push_back(r.participant_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const int k = std::min<int>(a.folds, static_cast<int>(ids.size()));
    plan = kfold_participant_split(ids, k, a.split_seed);
  }
  if (!a.out_dir.empty()) ensure_dir(a.out_dir);

  const auto reports = evaluate_methods(manifest, manifest_path.parent_path(), methods, cfg,
                                        plan ? &*plan : nullptr, /*include_dummy=*/true);
  const bool with_scenarios = std::any_of(manifest.recordings.begin(), manifest.recordings.end(),
                                          [](const Recording& r) { return r.scenario.has_value(); });

  out << summary_table(reports, with_scenarios);
  for (const auto& r : reports) {
    for (const auto& d : r.diagnostics) {
      if (d.excluded) err << r.method << " " << d.recording_id << ": " << d.message << "\n";
    }
  }
  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    for (const auto& r : reports) {
      write_text_file(dir / ("report_" + r.method + ".json"), report_to_json(r));
      write_text_file(dir / ("recordings_" + r.method + ".csv"), recordings_csv(r));
    }
    write_text_file(dir / "summary.csv", summary_csv(reports, with_scenarios));
    write_text_file(dir / "summary_se.csv", summary_csv(reports, with_scenarios, true));
  }
  return kExitOk;
}

// --------------------------------------------------------------------------

struct SynthArgs {
  std::string scenarios;
  int participants = 45;
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
  double duration_s = SynthConfig{}.duration_s;
  double fps = SynthConfig{}.fps;
  double ppg_rate_hz = CorpusOptions{}.base.ppg_rate_hz;
  double amplitude = SynthConfig{}.pulse_amplitude_frac;
  double noise = SynthConfig{}.noise_std_pixels;
  bool no_quantize = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  CorpusOptions opt;
  opt.participants = a.participants;
  opt.seed = a.seed;
  opt.jobs = a.jobs;
  opt.base.duration_s = a.duration_s;
  opt.base.fps = a.fps;
  opt.base.ppg_rate_hz = a.ppg_rate_hz;
  opt.base.pulse_amplitude_frac = a.amplitude;
  opt.base.noise_std_pixels = a.noise;
  opt.base.quantize = !a.no_quantize;
  require(a.participants >= 1, "--participants must be >= 1");
  opt.base.validate();

  const auto specs = a.scenarios.empty() ? default_scenarios() : parse_scenario_specs(read_text_file(a.scenarios));
  ensure_dir(a.out_dir);
  const Corpus corpus = scenario_corpus(specs, opt, a.out_dir);

  out << "recordings " << corpus.entries.size() << " (" << a.participants << " participants x " << specs.size()
      << " scenarios)\n";
  std::map<ScenarioLabel, std::pair<double, double>> hr_range;
  std::map<Lighting, std::pair<double, int>> pixel;
  for (const auto& e : corpus.entries) {
    auto [it, fresh] = hr_range.try_emplace(e.scenario, e.hr_bpm, e.hr_bpm);
    it->second.first = std::min(it->second.first, e.hr_bpm);
    it->second.second = std::max(it->second.second, e.hr_bpm);
    auto& p = pixel[e.scenario.lighting];
    p.first += e.mean_pixel;
    p.second += 1;
  }
  for (ScenarioLabel label : kScenarioOrder) {
    auto it = hr_range.find(label);
    if (it == hr_range.end()) continue;
    out << scenario_name(label) << " HR " << fixed(it->second.first, 1) << "-" << fixed(it->second.second, 1)
        << " BPM\n";
  }
  for (const auto& [light, p] : pixel) {
    out << lighting_name(light) << " mean pixel " << fixed(p.first / p.second) << "\n";
  }
  out << "manifest " << (fs::path(a.out_dir) / "manifest.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Remote photoplethysmography heart-rate estimation and benchmarking"};
  app.name(args.empty() ? "rppg" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate HR from one trace CSV or frame directory");
  c_est->add_option("input", est.input, "trace CSV or directory of frame_<n>.rgb8 files")->required();
  est.pipeline.attach(*c_est);
  c_est->add_option("--fps", est.fps, "frame rate (required for frame directories)");
  c_est->add_option("--roi", est.roi, "x,y,w,h region of each frame (default: full frame)");
  c_est->add_option("--downsample", est.downsample, "area-average frames to NxN before the ROI mean");
  c_est->add_option("--out", est.out_dir, "directory for psd_<METHOD>.csv");
  c_est->add_flag("--plot", est.plot, "write plot_<METHOD>.svg (into --out or the current directory)");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Benchmark methods on a dataset manifest");
  c_ev->add_option("manifest", ev.manifest, "manifest JSON")->required();
  ev.pipeline.attach(*c_ev);
  c_ev->add_option("--folds", ev.folds, "participant-wise folds (0 disables, capped at the participant count)");
  c_ev->add_option("--split-seed", ev.split_seed, "fold assignment seed");
  c_ev->add_option("--out", ev.out_dir, "directory for reports and summary CSVs");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate a synthetic scenario corpus");
  c_sy->add_option("--scenarios", sy.scenarios, "scenario list JSON (default: the four standard scenarios)");
  c_sy->add_option("--participants", sy.participants, "participants per scenario");
  c_sy->add_option("--seed", sy.seed, "corpus seed");
  c_sy->add_option("--out", sy.out_dir, "output directory")->required();
  c_sy->add_option("--jobs", sy.jobs, "worker threads");
  c_sy->add_option("--duration", sy.duration_s, "recording length in seconds");
  c_sy->add_option("--fps", sy.fps, "video frame rate");
  c_sy->add_option("--ppg-rate", sy.ppg_rate_hz, "ground-truth PPG sample rate");
  c_sy->add_option("--amplitude", sy.amplitude, "pulsatile amplitude as a fraction of the diffuse level");
  c_sy->add_option("--noise", sy.noise, "sensor noise standard deviation in pixel units");
  c_sy->add_flag("--no-quantize", sy.no_quantize, "keep fractional pixel values");

  try {
    std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rev.begin(), rev.end());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (c_est->parsed()) return cmd_estimate(est, out, err);
    if (c_ev->parsed()) return cmd_evaluate(ev, out, err);
    return cmd_synth(sy, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Numerical ? kExitNumericalError : kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumericalError;
  }
}

}  // namespace rppg::cli
