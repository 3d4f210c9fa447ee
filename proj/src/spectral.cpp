#include "rppg/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>

#include "rppg/error.hpp"
#include "rppg/simd.hpp"

namespace rppg {
namespace {

// Below this the in-band spectrum is treated as empty (rounding residue of a
// constant input, not a signal).
constexpr double kNoPowerDensity = 1e-24;
constexpr double kMinPeakOverMedian = 3.0;
constexpr double kMaxSnrDb = 200.0;
// Band-passed power below this fraction of the input's is filter leakage of
// out-of-band content, not a pulse.
constexpr double kMinInBandPowerFrac = 1e-4;

double centered_power(std::span<const double> x) {
  const double mu = simd::mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size());
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// Planning is not thread-safe in FFTW; execution with new arrays is.
class R2cPlans {
 public:
  ~R2cPlans() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n) {
    std::lock_guard lock(mu_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    auto in = fftw_alloc<double>(n);
    auto out = fftw_alloc<fftw_complex>(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    if (plan == nullptr) fail(ErrorKind::Numerical, "FFTW could not plan a transform of size " + std::to_string(n));
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::size_t, fftw_plan> plans_;
};

R2cPlans& plans() {
  static R2cPlans p;
  return p;
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

}  // namespace

std::size_t welch_fft_size(std::size_t segment_samples, double sample_rate_hz, bool zero_pad) {
  if (!zero_pad) return segment_samples;
  const auto needed = static_cast<std::size_t>(std::ceil(sample_rate_hz / kMaxBinHz - 1e-9));
  const std::size_t target = std::max(segment_samples, needed);
  std::size_t n = 1;
  while (n < target) n <<= 1;
  return n;
}

PsdEstimate welch_psd(const SampledSeries& series, const WelchOptions& options) {
  const double fs = series.sample_rate_hz();
  require(std::isfinite(options.seg_len_s) && options.seg_len_s > 0.0, "Welch segment length must be positive");
  require(options.overlap_frac >= 0.0 && options.overlap_frac < 1.0, "Welch overlap must lie in [0, 1)");
  const auto seg = static_cast<std::size_t>(std::llround(options.seg_len_s * fs));
  require(seg >= 8, "Welch segment must span at least 8 samples");
  const auto x = series.values();
  if (x.size() < seg) {
    fail(ErrorKind::InvalidArgument, "series of " + std::to_string(x.size()) +
                                         " samples is shorter than one Welch segment (" + std::to_string(seg) + ")");
  }
  const auto overlap = static_cast<std::size_t>(std::floor(static_cast<double>(seg) * options.overlap_frac));
  const std::size_t hop = std::max<std::size_t>(1, seg - overlap);
  const std::size_t nfft = welch_fft_size(seg, fs, options.zero_pad);
  const std::size_t bins = nfft / 2 + 1;

  const auto window = periodic_hann(seg);
  const double window_power = simd::dot(window, window);
  const auto& k = simd::kernels();

  fftw_plan plan = plans().get(nfft);
  auto in = fftw_alloc<double>(nfft);
  auto out = fftw_alloc<fftw_complex>(bins);
  std::fill(in.get(), in.get() + nfft, 0.0);

  std::vector<double> acc(bins, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    k.multiply(x.data() + start, window.data(), in.get(), seg);
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    k.accumulate_power(reinterpret_cast<const double*>(out.get()), bins, acc.data());
    ++segments;
  }

  PsdEstimate psd;
  psd.bin_hz = fs / static_cast<double>(nfft);
  psd.segments = segments;
  psd.segment_samples = seg;
  psd.fft_size = nfft;
  psd.freqs_hz.resize(bins);
  psd.density.resize(bins);
  const double scale = 1.0 / (static_cast<double>(segments) * fs * window_power);
  // Nyquist bin exists only for even lengths and is not doubled.
  const std::size_t last_doubled = nfft % 2 == 0 ? bins - 2 : bins - 1;
  for (std::size_t i = 0; i < bins; ++i) {
    psd.freqs_hz[i] = static_cast<double>(i) * psd.bin_hz;
    const double one_sided = (i >= 1 && i <= last_doubled) ? 2.0 : 1.0;
    psd.density[i] = acc[i] * scale * one_sided;
  }
  return psd;
}

HrEstimate pick_hr_peak(const PsdEstimate& psd, BandLimits band) {
  band.validate();
  const auto& f = psd.freqs_hz;
  const auto& d = psd.density;
  std::size_t first = f.size(), last = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] >= band.low_hz && f[i] <= band.high_hz) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == f.size()) fail(ErrorKind::Numerical, "no PSD bin falls inside the HR band");

  std::size_t best = first;
  double in_band_total = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    in_band_total += d[i];
    if (d[i] > d[best]) best = i;
  }
  const double peak = d[best];
  if (!(peak > kNoPowerDensity)) fail(ErrorKind::Numerical, "no spectral power inside the HR band");

  // A maximum that is only the tail of out-of-band energy is not a peak.
  const bool local_max = (best == 0 || peak >= d[best - 1]) && (best + 1 >= d.size() || peak >= d[best + 1]);
  std::vector<double> band_density(d.begin() + static_cast<std::ptrdiff_t>(first),
                                   d.begin() + static_cast<std::ptrdiff_t>(last + 1));
  auto mid = band_density.begin() + static_cast<std::ptrdiff_t>(band_density.size() / 2);
  std::nth_element(band_density.begin(), mid, band_density.end());
  double median = *mid;
  if (band_density.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(band_density.begin(), mid));
  }
  if (!local_max || !(peak > kMinPeakOverMedian * median)) {
    fail(ErrorKind::Numerical, "no dominant spectral peak inside the HR band");
  }

  HrEstimate est;
  est.peak_hz = f[best];
  est.bpm = 60.0 * f[best];
  est.peak_density = peak;
  est.band = band;
  // Hann main lobe: +-2 bins of the unpadded segment.
  const std::size_t lobe =
      psd.segment_samples > 0
          ? static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(psd.fft_size) / psd.segment_samples))
          : 0;
  double lobe_power = 0.0;
  for (std::size_t i = std::max(first, best > lobe ? best - lobe : 0); i <= std::min(last, best + lobe); ++i) {
    lobe_power += d[i];
  }
  const double rest = in_band_total - lobe_power;
  est.snr_db = rest > 0.0 ? std::min(kMaxSnrDb, 10.0 * std::log10(lobe_power / rest)) : kMaxSnrDb;
  return est;
}

HrEstimate estimate_hr(const SampledSeries& pulse, BandLimits band, const WelchOptions& options) {
  band.validate_for_rate(pulse.sample_rate_hz());
  return pick_hr_peak(welch_psd(pulse, options), band);
}

namespace {

WelchOptions clamp_segment(const WelchOptions& opt, const SampledSeries& s) {
  WelchOptions out = opt;
  const double available = static_cast<double>(s.size()) / s.sample_rate_hz();
  if (std::llround(out.seg_len_s * s.sample_rate_hz()) > static_cast<long long>(s.size())) {
    out.seg_len_s = available;
  }
  return out;
}

}  // namespace

PulseAnalysis analyze_pulse(const SampledSeries& pulse, const HrPipelineConfig& config) {
  config.band.validate_for_rate(pulse.sample_rate_hz());
  SampledSeries filtered = trim_filter_edges(bandpass(pulse, config.band), config.band);
  const double input_power = centered_power(pulse.values());
  if (!(centered_power(filtered.values()) >= kMinInBandPowerFrac * input_power) || input_power == 0.0) {
    fail(ErrorKind::Numerical, "no spectral power inside the HR band");
  }
  PsdEstimate psd = welch_psd(filtered, clamp_segment(config.welch, filtered));
  const HrEstimate hr = pick_hr_peak(psd, config.band);
  return PulseAnalysis{std::move(filtered), std::move(psd), hr};
}

HrEstimate hr_from_pulse(const SampledSeries& pulse, const HrPipelineConfig& config) {
  return analyze_pulse(pulse, config).hr;
}

HrEstimate gt_hr_from_ppg(const SampledSeries& ppg, const HrPipelineConfig& config) {
  require(ppg.sample_rate_hz() >= 10.0, "ground-truth PPG must be sampled at 10 Hz or more");
  const SampledSeries at_video_rate = resample(ppg, kGroundTruthRateHz);
  return hr_from_pulse(detrend(at_video_rate), config);
}

std::vector<WindowedHr> windowed_hr(const SampledSeries& pulse, const HrPipelineConfig& config, double window_s,
                                    double hop_s) {
  const SampledSeries filtered = bandpass(pulse, config.band);
  std::vector<WindowedHr> out;
  for (const SampledSeries& w : window_split(filtered, window_s, hop_s)) {
    const HrEstimate est = estimate_hr(w, config.band, clamp_segment(config.welch, w));
    out.push_back({w.t0_s() + 0.5 * w.duration_s(), est.bpm});
  }
  return out;
}

}  // namespace rppg
