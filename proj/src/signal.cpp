#include "rppg/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "rppg/error.hpp"

namespace rppg {

SampledSeries::SampledSeries(double sample_rate_hz, std::vector<double> values, double t0_s)
    : rate_(sample_rate_hz), values_(std::move(values)), t0_(t0_s) {
  require(std::isfinite(rate_) && rate_ > 0.0, "sample rate must be positive and finite");
  require(!values_.empty(), "series must contain at least one sample");
  require(std::isfinite(t0_), "series start time must be finite");
}

double SampledSeries::duration_s() const noexcept { return static_cast<double>(values_.size() - 1) / rate_; }

RgbTrace::RgbTrace(double sample_rate_hz, std::vector<double> r, std::vector<double> g, std::vector<double> b,
                   double t0_s)
    : rate_(sample_rate_hz), ch_{std::move(r), std::move(g), std::move(b)}, t0_(t0_s) {
  require(std::isfinite(rate_) && rate_ > 0.0, "trace frame rate must be positive and finite");
  require(std::isfinite(t0_), "trace start time must be finite");
  require(ch_[0].size() == ch_[1].size() && ch_[1].size() == ch_[2].size(), "trace channels differ in length");
  require(ch_[0].size() >= 2, "trace needs at least two frames");
  for (const auto& c : ch_) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!(c[i] >= 0.0 && c[i] <= 255.0)) {
        fail(ErrorKind::InvalidArgument,
             "trace value out of [0, 255] at frame " + std::to_string(i) + ": " + std::to_string(c[i]));
      }
    }
  }
}

double RgbTrace::duration_s() const noexcept { return static_cast<double>(size() - 1) / rate_; }

SampledSeries RgbTrace::channel_series(Channel c) const {
  const auto& v = ch_[static_cast<std::size_t>(c)];
  return SampledSeries(rate_, v, t0_);
}

RgbTrace RgbTrace::slice(std::size_t first, std::size_t count) const {
  require(first + count <= size(), "trace slice out of range");
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                               v.begin() + static_cast<std::ptrdiff_t>(first + count));
  };
  return RgbTrace(rate_, cut(ch_[0]), cut(ch_[1]), cut(ch_[2]), t0_ + static_cast<double>(first) / rate_);
}

RgbTrace RgbTrace::scaled(double k) const {
  auto mul = [k](std::vector<double> v) {
    for (double& x : v) x *= k;
    return v;
  };
  return RgbTrace(rate_, mul(ch_[0]), mul(ch_[1]), mul(ch_[2]), t0_);
}

void BandLimits::validate() const {
  require(std::isfinite(low_hz) && std::isfinite(high_hz) && low_hz > 0.0 && low_hz < high_hz,
          "band limits must satisfy 0 < low < high");
}

void BandLimits::validate_for_rate(double sample_rate_hz) const {
  validate();
  require(high_hz < sample_rate_hz / 2.0, "band upper edge " + std::to_string(high_hz) +
                                              " Hz is not below Nyquist for rate " + std::to_string(sample_rate_hz));
}

SampledSeries resample(const SampledSeries& series, double target_rate_hz) {
  require(std::isfinite(target_rate_hz) && target_rate_hz > 0.0, "target rate must be positive");
  require(series.size() >= 2, "resampling needs at least two samples");
  const auto x = series.values();
  const std::size_t n = x.size();
  const double step = series.sample_rate_hz() / target_rate_hz;  // source samples per output sample
  const auto count = static_cast<std::size_t>(
                         std::floor(static_cast<double>(n - 1) * target_rate_hz / series.sample_rate_hz() + 1e-9)) +
                     1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = static_cast<double>(k) * step;
    auto i = static_cast<std::size_t>(pos);
    if (i >= n - 1) i = n - 2;
    const double frac = pos - static_cast<double>(i);
    out[k] = frac == 0.0 ? x[i] : x[i] + frac * (x[i + 1] - x[i]);
  }
  return SampledSeries(target_rate_hz, std::move(out), series.t0_s());
}

SampledSeries detrend(const SampledSeries& series, double window_s) {
  const double rate = series.sample_rate_hz();
  require(std::isfinite(window_s) && window_s * rate >= 2.0 - 1e-9,
          "detrend window must span at least two samples");
  const auto x = series.values();
  const std::size_t n = x.size();
  const auto width = static_cast<std::size_t>(std::llround(window_s * rate));
  const std::size_t half = width / 2;

  // Prefix sums of x - x[0]: a constant input gives exact zeros.
  const double ref = x[0];
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (x[i] - ref);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    const double avg = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    out[i] = (x[i] - ref) - avg;
  }
  return SampledSeries(rate, std::move(out), series.t0_s());
}

std::vector<Biquad> design_butterworth_bandpass(BandLimits band, double sample_rate_hz) {
  band.validate_for_rate(sample_rate_hz);
  using cd = std::complex<double>;
  const double fs2 = 2.0 * sample_rate_hz;
  const double wl = fs2 * std::tan(std::numbers::pi * band.low_hz / sample_rate_hz);
  const double wh = fs2 * std::tan(std::numbers::pi * band.high_hz / sample_rate_hz);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Upper-half-plane pole of the order-2 Butterworth prototype; its conjugate
  // produces the conjugate band-pass poles, so each root below seeds a section.
  const cd proto = std::polar(1.0, 3.0 * std::numbers::pi / 4.0);
  const cd pb = proto * bw;
  const cd disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
  const std::array<cd, 2> analog{(pb + disc) / 2.0, (pb - disc) / 2.0};

  std::vector<Biquad> sections;
  for (const cd& s : analog) {
    const cd z = (fs2 + s) / (fs2 - s);
    sections.push_back(Biquad{1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  }

  // Normalize to unit magnitude at the digital image of the analog center.
  const double wc = 2.0 * std::atan(w0 / fs2);
  const cd zc = std::polar(1.0, -wc);  // z^-1 at the center
  cd h = 1.0;
  for (const Biquad& q : sections) {
    h *= (q.b0 + q.b1 * zc + q.b2 * zc * zc) / (1.0 + q.a1 * zc + q.a2 * zc * zc);
  }
  const double g = std::sqrt(1.0 / std::abs(h));
  for (Biquad& q : sections) {
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
  }
  return sections;
}

namespace {

struct SectionState {
  double z1 = 0.0, z2 = 0.0;
};

// Steady-state state of each section for a unit step input to the cascade.
std::vector<SectionState> step_initial_state(const std::vector<Biquad>& sections) {
  std::vector<SectionState> zi;
  double input_level = 1.0;
  for (const Biquad& q : sections) {
    const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double y = gain * input_level;
    SectionState s;
    s.z2 = q.b2 * input_level - q.a2 * y;
    s.z1 = y - q.b0 * input_level;
    zi.push_back(s);
    input_level = y;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& sections, const std::vector<SectionState>& unit_state, double x0,
                 std::vector<double>& data) {
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const Biquad& q = sections[k];
    double z1 = unit_state[k].z1 * x0;
    double z2 = unit_state[k].z2 * x0;
    for (double& v : data) {
      const double x = v;
      const double y = q.b0 * x + z1;
      z1 = q.b1 * x - q.a1 * y + z2;
      z2 = q.b2 * x - q.a2 * y;
      v = y;
    }
  }
}

}  // namespace

SampledSeries bandpass(const SampledSeries& series, BandLimits band) {
  const double rate = series.sample_rate_hz();
  const auto sections = design_butterworth_bandpass(band, rate);
  const std::size_t order = 2 * sections.size();
  const auto x = series.values();
  const std::size_t n = x.size();
  if (n < 6 * order) {
    fail(ErrorKind::InvalidArgument, "series of " + std::to_string(n) + " samples is too short for band-pass (need " +
                                         std::to_string(6 * order) + ")");
  }
  const std::size_t pad = std::min<std::size_t>(3 * (order + 1), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = step_initial_state(sections);
  run_cascade(sections, zi, ext.front(), ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, zi, ext.front(), ext);
  std::reverse(ext.begin(), ext.end());

  std::vector<double> out(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                          ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return SampledSeries(rate, std::move(out), series.t0_s());
}

std::size_t filter_settling_samples(std::size_t n, double sample_rate_hz, BandLimits band) {
  band.validate();
  const auto settle = static_cast<std::size_t>(std::llround(3.0 / band.low_hz * sample_rate_hz));
  const auto cap = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n)));
  return std::min(settle, cap);
}

SampledSeries trim_filter_edges(const SampledSeries& series, BandLimits band) {
  const std::size_t n = series.size();
  const std::size_t cut = filter_settling_samples(n, series.sample_rate_hz(), band);
  if (cut == 0) return series;
  const auto x = series.values();
  std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(cut),
                          x.end() - static_cast<std::ptrdiff_t>(cut));
  return SampledSeries(series.sample_rate_hz(), std::move(out), series.time_at(cut));
}

RgbSignal frame_difference_normalize(const RgbTrace& trace) {
  RgbSignal out;
  out.sample_rate_hz = trace.sample_rate_hz();
  out.t0_s = trace.t0_s();
  const std::size_t n = trace.size();
  for (std::size_t c = 0; c < 3; ++c) {
    const auto v = trace.channel(static_cast<Channel>(c));
    auto& d = out.channels[c];
    d.resize(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) {
      const double denom = v[t] + v[t + 1];
      if (denom == 0.0) {
        fail(ErrorKind::Numerical, "zero denominator in frame difference at frame " + std::to_string(t) +
                                       " (adjacent black frames)");
      }
      d[t] = (v[t + 1] - v[t]) / denom;
    }
  }
  return out;
}

std::vector<SampledSeries> window_split(const SampledSeries& series, double window_s, double stride_s) {
  const double rate = series.sample_rate_hz();
  require(std::isfinite(window_s) && window_s > 0.0, "window length must be positive");
  require(std::isfinite(stride_s) && stride_s > 0.0, "window stride must be positive");
  const auto width = static_cast<std::size_t>(std::llround(window_s * rate));
  const auto stride = static_cast<std::size_t>(std::llround(stride_s * rate));
  require(width >= 1 && stride >= 1, "window and stride must each span at least one sample");
  const std::size_t n = series.size();
  if (width > n) {
    fail(ErrorKind::InvalidArgument, "window of " + std::to_string(width) + " samples exceeds series length " +
                                         std::to_string(n));
  }
  const auto x = series.values();
  std::vector<SampledSeries> out;
  for (std::size_t start = 0; start + width <= n; start += stride) {
    out.emplace_back(rate,
                     std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(start),
                                         x.begin() + static_cast<std::ptrdiff_t>(start + width)),
                     series.time_at(start));
  }
  return out;
}

}  // namespace rppg
