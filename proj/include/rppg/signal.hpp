#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace rppg {

/// Uniformly sampled real-valued signal.
class SampledSeries {
 public:
  SampledSeries(double sample_rate_hz, std::vector<double> values, double t0_s = 0.0);

  double sample_rate_hz() const noexcept { return rate_; }
  double t0_s() const noexcept { return t0_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  /// (size - 1) / rate
  double duration_s() const noexcept;
  double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) / rate_; }

  std::vector<double> take_values() && { return std::move(values_); }

 private:
  double rate_;
  std::vector<double> values_;
  double t0_;
};

enum class Channel : std::size_t { R = 0, G = 1, B = 2 };

/// Three equal-length channel sequences with a common clock. No range
/// restrictions; used for intermediate products such as frame differences.
struct RgbSignal {
  double sample_rate_hz = 0.0;
  std::array<std::vector<double>, 3> channels;
  double t0_s = 0.0;

  std::size_t size() const noexcept { return channels[0].size(); }
};

/// Per-frame spatial-mean RGB trace in pixel units: equal-length channels of
/// at least two samples, every value in [0, 255].
class RgbTrace {
 public:
  RgbTrace(double sample_rate_hz, std::vector<double> r, std::vector<double> g, std::vector<double> b,
           double t0_s = 0.0);

  double sample_rate_hz() const noexcept { return rate_; }
  double t0_s() const noexcept { return t0_; }
  std::size_t size() const noexcept { return ch_[0].size(); }
  std::span<const double> channel(Channel c) const noexcept { return ch_[static_cast<std::size_t>(c)]; }
  std::span<const double> r() const noexcept { return ch_[0]; }
  std::span<const double> g() const noexcept { return ch_[1]; }
  std::span<const double> b() const noexcept { return ch_[2]; }
  double duration_s() const noexcept;

  SampledSeries channel_series(Channel c) const;
  /// Samples [first, first + count) with the start time shifted accordingly.
  RgbTrace slice(std::size_t first, std::size_t count) const;
  /// Every channel multiplied by k (must keep values within [0, 255]).
  RgbTrace scaled(double k) const;

 private:
  double rate_;
  std::array<std::vector<double>, 3> ch_;
  double t0_;
};

struct BandLimits {
  double low_hz = 0.6;
  double high_hz = 3.0;

  /// Throws unless 0 < low < high.
  void validate() const;
  /// Throws unless additionally high < rate / 2.
  void validate_for_rate(double sample_rate_hz) const;
};

inline constexpr BandLimits kDefaultHrBand{0.6, 3.0};
inline constexpr double kDefaultDetrendWindowS = 1.6;

/// Linear-interpolation resampling over the same time span, first sample at t0.
SampledSeries resample(const SampledSeries& series, double target_rate_hz);

/// Input minus its centered moving average of round(window_s * rate) samples
/// (an even count is widened by one to stay centered);
/// the averaging window is truncated at the edges.
SampledSeries detrend(const SampledSeries& series, double window_s = kDefaultDetrendWindowS);

/// Second-order sections of a digital filter, transposed direct form II.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Butterworth band-pass (order-2 prototype, two sections) designed with the
/// bilinear transform and pre-warped edges; unit gain at the (pre-warped) geometric center.
std::vector<Biquad> design_butterworth_bandpass(BandLimits band, double sample_rate_hz);

/// Zero-phase band-pass: the section cascade applied forward then backward,
/// with odd-reflection padding and steady-state initial conditions.
SampledSeries bandpass(const SampledSeries& series, BandLimits band);

/// Samples removed from each end after zero-phase filtering:
/// 3 / low_hz seconds, capped at 10% of the series.
std::size_t filter_settling_samples(std::size_t n, double sample_rate_hz, BandLimits band);

/// Drops `filter_settling_samples` from both ends.
SampledSeries trim_filter_edges(const SampledSeries& series, BandLimits band);

/// d(t) = (c(t+1) - c(t)) / (c(t) + c(t+1)) per channel; length N - 1.
RgbSignal frame_difference_normalize(const RgbTrace& trace);

/// Consecutive windows of round(window_s * rate) samples every round(stride_s * rate) samples;
/// a trailing partial window is dropped.
std::vector<SampledSeries> window_split(const SampledSeries& series, double window_s, double stride_s);

}  // namespace rppg
