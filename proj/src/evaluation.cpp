#include "rppg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"
#include "rppg/error.hpp"

namespace rppg {

double EvalPair::abs_error() const { return std::abs(hr_gt_bpm - hr_est_bpm); }

double mae(std::span<const EvalPair> pairs) {
  require(!pairs.empty(), "MAE of an empty list");
  double s = 0.0;
  for (const auto& p : pairs) s += p.abs_error();
  return s / static_cast<double>(pairs.size());
}

double standard_error(std::span<const EvalPair> pairs) {
  require(pairs.size() >= 2, "standard error needs at least two pairs");
  const double m = mae(pairs);
  double ss = 0.0;
  for (const auto& p : pairs) ss += (p.abs_error() - m) * (p.abs_error() - m);
  const double n = static_cast<double>(pairs.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

ConstantPredictor dummy_mean_estimator(std::span<const double> train_hrs) {
  require(!train_hrs.empty(), "dummy estimator needs a non-empty training set");
  return ConstantPredictor(std::accumulate(train_hrs.begin(), train_hrs.end(), 0.0) /
                           static_cast<double>(train_hrs.size()));
}

int FoldPlan::fold_of(const std::string& participant) const {
  const auto it = assignments.find(participant);
  require(it != assignments.end(), "participant '" + participant + "' is not in the fold plan");
  return it->second;
}

std::vector<std::vector<std::string>> FoldPlan::folds() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(k));
  for (const auto& [p, f] : assignments) out[static_cast<std::size_t>(f)].push_back(p);
  return out;
}

FoldPlan kfold_participant_split(std::vector<std::string> participant_ids, int k, std::uint64_t seed) {
  std::sort(participant_ids.begin(), participant_ids.end());
  participant_ids.erase(std::unique(participant_ids.begin(), participant_ids.end()), participant_ids.end());
  require(k >= 1, "fold count must be positive");
  if (static_cast<std::size_t>(k) > participant_ids.size()) {
    fail(ErrorKind::InvalidArgument, "fold count " + std::to_string(k) + " exceeds participant count " +
                                         std::to_string(participant_ids.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(participant_ids.begin(), participant_ids.end(), rng);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < participant_ids.size(); ++i) {
    plan.assignments.emplace(participant_ids[i], static_cast<int>(i % static_cast<std::size_t>(k)));
  }
  return plan;
}

ErrorStat error_stat(std::span<const EvalPair> pairs) {
  ErrorStat s;
  s.n = pairs.size();
  s.mae = mae(pairs);
  if (pairs.size() >= 2) s.se = standard_error(pairs);
  return s;
}

void EvalConfig::validate() const {
  method.validate();
  hr.band.validate();
  require(hr.welch.seg_len_s > 0.0 && hr.welch.overlap_frac >= 0.0 && hr.welch.overlap_frac < 1.0,
          "invalid Welch parameters");
  require(jobs >= 1, "jobs must be at least 1");
}

std::string config_fingerprint(const EvalConfig& c, std::string_view method, const FoldPlan* folds) {
  std::string canon = std::string(method);
  auto add = [&canon](std::string_view key, double v) {
    canon += ';';
    canon += key;
    canon += '=';
    canon += format_double(v);
  };
  add("band_lo", c.hr.band.low_hz);
  add("band_hi", c.hr.band.high_hz);
  add("welch_seg", c.hr.welch.seg_len_s);
  add("welch_overlap", c.hr.welch.overlap_frac);
  add("zero_pad", c.hr.welch.zero_pad ? 1 : 0);
  add("pos_window", c.method.pos_window_s);
  add("ica_seed", static_cast<double>(c.method.ica_seed));
  add("ica_iter", c.method.ica_max_iter);
  add("ica_tol", c.method.ica_tol);
  add("method_band_lo", c.method.band.low_hz);
  add("method_band_hi", c.method.band.high_hz);
  if (folds != nullptr) {
    add("folds", folds->k);
    for (const auto& [p, f] : folds->assignments) canon += ";" + p + ":" + std::to_string(f);
  }
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void aggregate(EvalReport& report, const FoldPlan* fold_plan) {
  std::sort(report.per_recording.begin(), report.per_recording.end(),
            [](const EvalPair& a, const EvalPair& b) { return a.recording_id < b.recording_id; });
  report.per_scenario.clear();
  report.overall.reset();
  report.folds.clear();
  report.fold_mean_mae.reset();
  if (report.per_recording.empty()) return;
  report.overall = error_stat(report.per_recording);
  for (const ScenarioLabel& label : kScenarioOrder) {
    std::vector<EvalPair> subset;
    for (const auto& p : report.per_recording) {
      if (p.scenario == label) subset.push_back(p);
    }
    if (!subset.empty()) report.per_scenario.emplace_back(label, error_stat(subset));
  }
  if (fold_plan != nullptr) {
    double sum = 0.0;
    int used = 0;
    for (int f = 0; f < fold_plan->k; ++f) {
      std::vector<EvalPair> subset;
      for (const auto& p : report.per_recording) {
        if (fold_plan->fold_of(p.participant_id) == f) subset.push_back(p);
      }
      FoldStat fs{f, std::nullopt};
      if (!subset.empty()) {
        fs.stat = error_stat(subset);
        sum += fs.stat->mae;
        ++used;
      }
      report.folds.push_back(fs);
    }
    if (used > 0) report.fold_mean_mae = sum / used;
  }
}

namespace {

struct Outcome {
  std::optional<double> gt_bpm;
  std::string gt_error;
  std::vector<std::optional<double>> est_bpm;  // per method
  std::vector<std::string> est_error;
  std::vector<std::string> notes;  // per method, non-excluding
};

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

std::vector<EvalReport> evaluate_methods(const DatasetManifest& manifest, const fs::path& base_dir,
                                         std::span<const MethodId> methods, const EvalConfig& config,
                                         const FoldPlan* fold_plan, bool include_dummy) {
  config.validate();
  if (fold_plan != nullptr) {
    for (const auto& r : manifest.recordings) fold_plan->fold_of(r.participant_id);
  }

  std::vector<const Recording*> order;
  for (const auto& r : manifest.recordings) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const Recording* a, const Recording* b) { return a->recording_id < b->recording_id; });

  std::vector<Outcome> outcomes(order.size());
  detail::parallel_for(order.size(), config.jobs, [&](std::size_t i) {
    const Recording& rec = *order[i];
    Outcome& out = outcomes[i];
    out.est_bpm.assign(methods.size(), std::nullopt);
    out.est_error.assign(methods.size(), {});
    out.notes.assign(methods.size(), {});
    std::optional<std::pair<RgbTrace, SampledSeries>> aligned;
    try {
      const LoadedRecording loaded = load_recording(rec, base_dir);
      aligned.emplace(align(loaded.trace, loaded.ppg));
      if (aligned->first.duration_s() < kMinRecordingS - 1e-9) {
        fail(ErrorKind::InvalidArgument, "recording shorter than 10 s");
      }
    } catch (const std::exception& e) {
      out.gt_error = "load: " + describe(e);
      return;
    }
    try {
      out.gt_bpm = gt_hr_from_ppg(aligned->second, config.hr).bpm;
    } catch (const std::exception& e) {
      out.gt_error = "ground truth: " + describe(e);
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        SampledSeries pulse = [&] {
          if (methods[m] == MethodId::Ica) {
            IcaResult r = ica_detailed(aligned->first, config.method);
            if (!r.converged) {
              out.notes[m] = "ICA did not converge in " + std::to_string(config.method.ica_max_iter) +
                             " iterations; ranked whitened PCA components instead";
            }
            return std::move(r.pulse.signal);
          }
          return run_method(methods[m], aligned->first, config.method).signal;
        }();
        out.est_bpm[m] = hr_from_pulse(pulse, config.hr).bpm;
      } catch (const std::exception& e) {
        out.est_error[m] = describe(e);
      }
    }
  });

  std::vector<EvalReport> reports;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    EvalReport rep;
    rep.method = std::string(method_name(methods[m]));
    rep.config_fingerprint = config_fingerprint(config, rep.method, fold_plan);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Recording& rec = *order[i];
      const Outcome& o = outcomes[i];
      if (!o.gt_bpm) {
        rep.diagnostics.push_back({rec.recording_id, o.gt_error, true});
      } else if (!o.est_bpm[m]) {
        rep.diagnostics.push_back({rec.recording_id, o.est_error[m], true});
      } else {
        rep.per_recording.push_back({rec.recording_id, rec.participant_id, rec.scenario, *o.gt_bpm, *o.est_bpm[m]});
      }
      if (!o.notes[m].empty() && o.gt_bpm) rep.diagnostics.push_back({rec.recording_id, o.notes[m], false});
    }
    rep.excluded = static_cast<std::size_t>(
        std::count_if(rep.diagnostics.begin(), rep.diagnostics.end(), [](const Diagnostic& d) { return d.excluded; }));
    aggregate(rep, fold_plan);
    reports.push_back(std::move(rep));
  }

  if (include_dummy) {
    EvalReport rep;
    rep.method = "DUMMY";
    rep.config_fingerprint = config_fingerprint(config, rep.method, fold_plan);
    std::vector<EvalPair> scored;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Recording& rec = *order[i];
      if (!outcomes[i].gt_bpm) {
        rep.diagnostics.push_back({rec.recording_id, outcomes[i].gt_error, true});
        continue;
      }
      scored.push_back({rec.recording_id, rec.participant_id, rec.scenario, *outcomes[i].gt_bpm, 0.0});
    }
    auto train_mean = [&](std::optional<int> held_out_fold) {
      std::vector<double> train;
      for (const auto& p : scored) {
        if (!held_out_fold || fold_plan->fold_of(p.participant_id) != *held_out_fold) train.push_back(p.hr_gt_bpm);
      }
      // A single fold has no training data of its own; fall back to all recordings.
      if (train.empty()) {
        for (const auto& p : scored) train.push_back(p.hr_gt_bpm);
      }
      return dummy_mean_estimator(train);
    };
    if (!scored.empty()) {
      if (fold_plan != nullptr) {
        for (auto& p : scored) p.hr_est_bpm = train_mean(fold_plan->fold_of(p.participant_id)).predict();
      } else {
        const ConstantPredictor pred = train_mean(std::nullopt);
        for (auto& p : scored) p.hr_est_bpm = pred(p);
      }
    }
    rep.per_recording = std::move(scored);
    rep.excluded = rep.diagnostics.size();
    aggregate(rep, fold_plan);
    reports.push_back(std::move(rep));
  }
  return reports;
}

EvalReport evaluate_method(const DatasetManifest& manifest, const fs::path& base_dir, MethodId method,
                           const EvalConfig& config, const FoldPlan* fold_plan) {
  const MethodId one[] = {method};
  return std::move(evaluate_methods(manifest, base_dir, one, config, fold_plan, false).front());
}

namespace {

nlohmann::ordered_json stat_json(const std::optional<ErrorStat>& s) {
  if (!s) return nullptr;
  nlohmann::ordered_json j;
  j["mae"] = s->mae;
  j["se"] = s->se ? nlohmann::ordered_json(*s->se) : nlohmann::ordered_json(nullptr);
  j["n"] = s->n;
  return j;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["method"] = r.method;
  j["config_fingerprint"] = r.config_fingerprint;
  j["overall"] = stat_json(r.overall);
  ordered_json scen = ordered_json::object();
  for (const auto& [label, stat] : r.per_scenario) scen[scenario_name(label)] = stat_json(stat);
  j["per_scenario"] = scen;
  if (!r.folds.empty()) {
    ordered_json folds = ordered_json::array();
    for (const auto& f : r.folds) {
      ordered_json fj;
      fj["fold"] = f.fold;
      fj["stat"] = stat_json(f.stat);
      folds.push_back(fj);
    }
    j["folds"] = folds;
    j["fold_mean_mae"] = r.fold_mean_mae ? ordered_json(*r.fold_mean_mae) : ordered_json(nullptr);
  }
  j["excluded"] = r.excluded;
  ordered_json diags = ordered_json::array();
  for (const auto& d : r.diagnostics) {
    diags.push_back({{"recording_id", d.recording_id}, {"message", d.message}, {"excluded", d.excluded}});
  }
  j["diagnostics"] = diags;
  ordered_json recs = ordered_json::array();
  for (const auto& p : r.per_recording) {
    ordered_json pj;
    pj["recording_id"] = p.recording_id;
    pj["participant_id"] = p.participant_id;
    pj["scenario"] = p.scenario ? scenario_name(*p.scenario) : std::string("unlabeled");
    pj["hr_gt_bpm"] = p.hr_gt_bpm;
    pj["hr_est_bpm"] = p.hr_est_bpm;
    pj["abs_error"] = p.abs_error();
    recs.push_back(pj);
  }
  j["per_recording"] = recs;
  return j.dump(2) + "\n";
}

std::string summary_csv(std::span<const EvalReport> reports, bool with_scenarios, bool se) {
  std::string out = "method";
  if (with_scenarios) {
    for (const auto& label : kScenarioOrder) out += "," + scenario_name(label);
  }
  out += ",ALL\n";
  auto cell = [se](const std::optional<ErrorStat>& s) -> std::string {
    if (!s) return "";
    if (se) return s->se ? fixed4(*s->se) : std::string();
    return fixed4(s->mae);
  };
  for (const auto& r : reports) {
    out += r.method;
    if (with_scenarios) {
      for (const auto& label : kScenarioOrder) {
        std::optional<ErrorStat> s;
        for (const auto& [l, stat] : r.per_scenario) {
          if (l == label) s = stat;
        }
        out += "," + cell(s);
      }
    }
    out += "," + cell(r.overall) + "\n";
  }
  return out;
}

std::string recordings_csv(const EvalReport& r) {
  std::string out = "recording_id,participant_id,scenario,hr_gt_bpm,hr_est_bpm,abs_error\n";
  for (const auto& p : r.per_recording) {
    out += p.recording_id + "," + p.participant_id + "," +
           (p.scenario ? scenario_name(*p.scenario) : std::string("unlabeled")) + "," + format_double(p.hr_gt_bpm) +
           "," + format_double(p.hr_est_bpm) + "," + format_double(p.abs_error()) + "\n";
  }
  return out;
}

}  // namespace rppg
