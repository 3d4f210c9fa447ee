#pragma once

#include <cstddef>
#include <vector>

#include "rppg/signal.hpp"

namespace rppg {

/// One-sided power spectral density on a uniform frequency grid starting at 0 Hz.
struct PsdEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> density;
  double bin_hz = 0.0;
  std::size_t segments = 0;
  std::size_t segment_samples = 0;
  std::size_t fft_size = 0;
};

/// Bin spacing needed for half-BPM peak resolution.
inline constexpr double kMaxBinHz = 0.5 / 60.0;

struct WelchOptions {
  double seg_len_s = 20.0;
  double overlap_frac = 0.5;
  /// Pad each segment to the next power of two with bin spacing <= kMaxBinHz.
  bool zero_pad = true;
};

/// FFT length for a segment: the segment itself, or with zero padding the
/// smallest power of two >= the segment giving bins no wider than kMaxBinHz.
std::size_t welch_fft_size(std::size_t segment_samples, double sample_rate_hz, bool zero_pad);

/// Welch averaged periodogram with a periodic Hann window. Density is scaled
/// so that sum(density) * bin_hz equals the mean windowed signal power.
PsdEstimate welch_psd(const SampledSeries& series, const WelchOptions& options = {});

struct HrEstimate {
  double bpm = 0.0;
  double peak_hz = 0.0;
  double peak_density = 0.0;
  BandLimits band;
  /// Power in the peak's window main lobe over the remaining in-band power, in dB.
  double snr_db = 0.0;
};

/// Peak of a PSD inside the band (ties go to the lower frequency). Throws
/// ErrorKind::Numerical when no bin falls in the band or the in-band spectrum
/// carries no peak: zero density, or a maximum not above 3x the in-band median.
HrEstimate pick_hr_peak(const PsdEstimate& psd, BandLimits band);

/// 60 x argmax in-band frequency of welch_psd(pulse).
HrEstimate estimate_hr(const SampledSeries& pulse, BandLimits band, const WelchOptions& options = {});

struct HrPipelineConfig {
  BandLimits band = kDefaultHrBand;
  WelchOptions welch;
};

/// Intermediate products of hr_from_pulse.
struct PulseAnalysis {
  SampledSeries filtered;  // band-passed and edge-trimmed
  PsdEstimate psd;
  HrEstimate hr;
};

/// Shared post-processing for every pulse signal: zero-phase band-pass, edge
/// trim, then estimate_hr with the Welch segment clamped to the trimmed length.
/// Also a Numerical error when the band keeps under 1e-4 of the pulse power.
PulseAnalysis analyze_pulse(const SampledSeries& pulse, const HrPipelineConfig& config = {});
HrEstimate hr_from_pulse(const SampledSeries& pulse, const HrPipelineConfig& config = {});

inline constexpr double kGroundTruthRateHz = 25.0;

/// Ground-truth HR from a contact PPG at any rate >= 10 Hz: resample to 25 Hz,
/// detrend, then the same path as hr_from_pulse.
HrEstimate gt_hr_from_ppg(const SampledSeries& ppg, const HrPipelineConfig& config = {});

struct WindowedHr {
  double t_center_s;
  double bpm;
};

/// Band-pass the whole pulse, then one estimate per window (default 10 s every 1 s).
std::vector<WindowedHr> windowed_hr(const SampledSeries& pulse, const HrPipelineConfig& config = {},
                                    double window_s = 10.0, double hop_s = 1.0);

}  // namespace rppg
