#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rppg/error.hpp"
#include "rppg/signal.hpp"
#include "rppg/spectral.hpp"
#include "support/oracles.hpp"

using namespace rppg;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no rppg::Error thrown";
  return ErrorKind::Io;
}

std::vector<double> vals(const SampledSeries& s) { return {s.values().begin(), s.values().end()}; }

}  // namespace

TEST(SampledSeries, RejectsBadRateAndEmpty) {
  EXPECT_EQ(kind_of([] { SampledSeries(0.0, {1.0}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { SampledSeries(-1.0, {1.0}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { SampledSeries(10.0, {}); }), ErrorKind::InvalidArgument);
  SampledSeries s(4.0, {1, 2, 3, 4, 5}, 2.0);
  EXPECT_DOUBLE_EQ(s.duration_s(), 1.0);
  EXPECT_DOUBLE_EQ(s.time_at(2), 2.5);
}

TEST(RgbTrace, EnforcesRangeAndLength) {
  EXPECT_EQ(kind_of([] { RgbTrace(25, {1, 2}, {1, 2}, {1}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { RgbTrace(25, {1}, {1}, {1}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { RgbTrace(25, {1, 256}, {1, 2}, {1, 2}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { RgbTrace(25, {1, -0.5}, {1, 2}, {1, 2}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { RgbTrace(25, {1, NAN}, {1, 2}, {1, 2}); }), ErrorKind::InvalidArgument);
  RgbTrace t(10, {0, 255, 3}, {1, 2, 3}, {4, 5, 6}, 1.0);
  auto s = t.slice(1, 2);
  EXPECT_DOUBLE_EQ(s.t0_s(), 1.1);
  EXPECT_EQ(s.r()[0], 255);
  EXPECT_EQ(kind_of([&] { (void)t.scaled(2.0); }), ErrorKind::InvalidArgument);
}

TEST(BandLimits, Validation) {
  EXPECT_NO_THROW((BandLimits{0.6, 3.0}.validate_for_rate(25.0)));
  EXPECT_THROW((BandLimits{0.0, 3.0}.validate()), Error);
  EXPECT_THROW((BandLimits{3.0, 3.0}.validate()), Error);
  EXPECT_THROW((BandLimits{0.6, 3.0}.validate_for_rate(6.0)), Error);
}

TEST(Resample, MidpointExample) {
  auto out = resample(SampledSeries(1.0, {0, 1, 2}), 2.0);
  EXPECT_EQ(vals(out), (std::vector<double>{0, 0.5, 1, 1.5, 2}));
  EXPECT_DOUBLE_EQ(out.sample_rate_hz(), 2.0);
}

TEST(Resample, IdentityAtOwnRate) {
  std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  auto out = resample(SampledSeries(7.0, x, 0.25), 7.0);
  EXPECT_EQ(vals(out), x);
  EXPECT_DOUBLE_EQ(out.t0_s(), 0.25);
}

TEST(Resample, ExactOnAffineSignals) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5), r(3, 200);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u(rng), b = u(rng), fs = r(rng), target = r(rng), t0 = u(rng);
    std::vector<double> x(400);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * (t0 + i / fs) + b;
    auto out = resample(SampledSeries(fs, x, t0), target);
    EXPECT_DOUBLE_EQ(out.t0_s(), t0);
    EXPECT_LE(out.time_at(out.size() - 1), t0 + (x.size() - 1) / fs + 1e-9);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double want = a * out.time_at(i) + b;
      EXPECT_NEAR(out[i], want, 1e-9 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST(Resample, PpgToneKeepsSpectralPeak) {
  SampledSeries fast(1000.0, oracle::tone(1.2, 1000.0, 60000));
  auto slow = resample(fast, 25.0);
  auto psd = welch_psd(slow);
  const double peak = oracle::peak_freq(psd.density, psd.bin_hz, 0.6, 3.0);
  EXPECT_NEAR(peak, 1.2, psd.bin_hz);
}

TEST(Resample, Errors) {
  EXPECT_THROW(resample(SampledSeries(1.0, {1.0}), 2.0), Error);
  EXPECT_THROW(resample(SampledSeries(1.0, {1.0, 2.0}), 0.0), Error);
}

TEST(Detrend, ConstantGivesZeros) {
  auto out = detrend(SampledSeries(25.0, std::vector<double>(300, 117.3)));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Detrend, RampWithFullWindowHasZeroMeanResidual) {
  std::vector<double> x(101);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.3 * i - 4.0;
  auto out = detrend(SampledSeries(10.0, x), 10.1);
  double s = 0;
  for (double v : out.values()) s += v;
  EXPECT_NEAR(s / x.size(), 0.0, 1e-12);
}

TEST(Detrend, MatchesBruteForceMovingAverage) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (double window_s : {0.08, 0.5, 1.6, 2.0}) {
    const double fs = 25.0;
    std::vector<double> x(400);
    for (auto& v : x) v = 50 + g(rng);
    auto out = detrend(SampledSeries(fs, x), window_s);
    const long w = std::lround(window_s * fs);
    const long h = w / 2;
    for (long i = 0; i < static_cast<long>(x.size()); ++i) {
      const long lo = std::max(0L, i - h), hi = std::min<long>(x.size() - 1, i + h);
      double s = 0;
      for (long j = lo; j <= hi; ++j) s += x[j];
      EXPECT_NEAR(out[i], x[i] - s / (hi - lo + 1), 1e-9);
    }
  }
}

TEST(Detrend, ToneDominatesAfterRampRemoval) {
  const double fs = 25.0;
  auto x = oracle::tone(1.5, fs, 1500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.5 * i;
  auto out = detrend(SampledSeries(fs, x), 2.0);
  auto psd = welch_psd(out);
  double low = 0, at_tone = 0;
  for (std::size_t k = 0; k < psd.density.size(); ++k) {
    if (psd.freqs_hz[k] < 0.2) low = std::max(low, psd.density[k]);
    at_tone = std::max(at_tone, psd.density[k]);
  }
  EXPECT_NEAR(oracle::peak_freq(psd.density, psd.bin_hz, 0.0, 12.5), 1.5, psd.bin_hz);
  EXPECT_GT(at_tone, 100 * low);
}

TEST(Detrend, RejectsTooShortWindow) {
  EXPECT_THROW(detrend(SampledSeries(25.0, std::vector<double>(100, 1.0)), 0.04), Error);
}

TEST(Bandpass, DesignHasUnitCenterGainAndHalfPowerEdges) {
  for (double fs : {25.0, 30.0, 60.0}) {
    const BandLimits band{0.6, 3.0};
    auto sos = design_butterworth_bandpass(band, fs);
    // Center of the pre-warped edges, mapped back to the digital axis.
    const double warp = std::sqrt(std::tan(M_PI * 0.6 / fs) * std::tan(M_PI * 3.0 / fs));
    EXPECT_NEAR(oracle::cascade_gain(sos, std::atan(warp) * fs / M_PI, fs), 1.0, 1e-9);
    EXPECT_NEAR(oracle::cascade_gain(sos, 0.6, fs), std::sqrt(0.5), 1e-9);
    EXPECT_NEAR(oracle::cascade_gain(sos, 3.0, fs), std::sqrt(0.5), 1e-9);
  }
}

TEST(Bandpass, ForwardBackwardAttenuatesTwentyDbAtHalfLowAndTwiceHigh) {
  const double fs = 25.0;
  auto sos = design_butterworth_bandpass(kDefaultHrBand, fs);
  // Forward-backward squares the magnitude response.
  const double lo = std::pow(oracle::cascade_gain(sos, 0.3, fs), 2);
  const double hi = std::pow(oracle::cascade_gain(sos, 6.0, fs), 2);
  EXPECT_LE(20 * std::log10(lo), -20.0);
  EXPECT_LE(20 * std::log10(hi), -20.0);

  const std::size_t n = 1500, trim = 200;
  auto out_lo = vals(bandpass(SampledSeries(fs, oracle::tone(0.3, fs, n)), kDefaultHrBand));
  auto out_hi = vals(bandpass(SampledSeries(fs, oracle::tone(6.0, fs, n)), kDefaultHrBand));
  EXPECT_LE(oracle::max_abs(out_lo, trim), 0.1);
  EXPECT_LE(oracle::max_abs(out_hi, trim), 0.1);
}

TEST(Bandpass, DcIsRemovedAfterTrim) {
  SampledSeries dc(25.0, std::vector<double>(1500, 100.0));
  auto out = trim_filter_edges(bandpass(dc, kDefaultHrBand), kDefaultHrBand);
  EXPECT_LT(oracle::max_abs(vals(out)), 1e-3);
}

TEST(Bandpass, InBandToneKeepsAmplitudeAndPhase) {
  const double fs = 25.0;
  auto x = oracle::tone(1.5, fs, 1500);
  auto y = vals(bandpass(SampledSeries(fs, x), kDefaultHrBand));
  const std::size_t trim = 125;
  const double amp = oracle::max_abs(y, trim);
  EXPECT_GE(amp, 0.9);
  EXPECT_LE(amp, 1.0 + 1e-6);
  // Zero phase: cross-correlation is maximal at lag 0.
  auto xcorr = [&](int lag) {
    double s = 0;
    for (std::size_t i = trim; i + trim < x.size(); ++i) s += x[i] * y[i + lag];
    return s;
  };
  for (int lag : {-2, -1, 1, 2}) EXPECT_GT(xcorr(0), xcorr(lag));
}

TEST(Bandpass, DriftPlusToneKeepsTonePeak) {
  const double fs = 25.0;
  auto x = oracle::tone(0.1, fs, 1500, 10.0);
  auto t = oracle::tone(1.5, fs, 1500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += t[i];
  auto y = trim_filter_edges(bandpass(SampledSeries(fs, x), kDefaultHrBand), kDefaultHrBand);
  auto yv = vals(y);
  auto p = oracle::hann_periodogram(yv, fs, 4096);
  EXPECT_NEAR(oracle::peak_freq(p, fs / 4096, 0.0, 12.5), 1.5, fs / 4096);
}

TEST(Bandpass, LinearAndScaleEquivariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(700), y(700), xy(700), kx(700);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    y[i] = g(rng);
    xy[i] = x[i] + y[i];
    kx[i] = 3.7 * x[i];
  }
  auto fx = vals(bandpass(SampledSeries(25, x), kDefaultHrBand));
  auto fy = vals(bandpass(SampledSeries(25, y), kDefaultHrBand));
  auto fxy = vals(bandpass(SampledSeries(25, xy), kDefaultHrBand));
  auto fkx = vals(bandpass(SampledSeries(25, kx), kDefaultHrBand));
  const double scale = oracle::max_abs(fxy);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(fxy[i], fx[i] + fy[i], 1e-9 * scale);
    EXPECT_NEAR(fkx[i], 3.7 * fx[i], 1e-9 * 3.7 * scale);
  }
}

TEST(Bandpass, Errors) {
  EXPECT_EQ(kind_of([] { bandpass(SampledSeries(5.0, std::vector<double>(100, 0.0)), kDefaultHrBand); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { bandpass(SampledSeries(25.0, std::vector<double>(23, 0.0)), kDefaultHrBand); }),
            ErrorKind::InvalidArgument);
  EXPECT_NO_THROW(bandpass(SampledSeries(25.0, std::vector<double>(24, 0.0)), kDefaultHrBand));
}

TEST(TrimEdges, SettlingLengthIsCapped) {
  EXPECT_EQ(filter_settling_samples(1500, 25.0, kDefaultHrBand), 125u);
  EXPECT_EQ(filter_settling_samples(500, 25.0, kDefaultHrBand), 50u);
  SampledSeries s(25.0, std::vector<double>(1500, 1.0), 1.0);
  auto t = trim_filter_edges(s, kDefaultHrBand);
  EXPECT_EQ(t.size(), 1250u);
  EXPECT_DOUBLE_EQ(t.t0_s(), 1.0 + 125 / 25.0);
}

TEST(FrameDifference, HandComputedValues) {
  RgbTrace t(25, {100, 102}, {50, 50}, {50, 100});
  auto d = frame_difference_normalize(t);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d.channels[0][0], 2.0 / 202.0, 1e-12);
  EXPECT_NEAR(d.channels[0][0], 0.00990099009900990099, 1e-12);
  EXPECT_EQ(d.channels[1][0], 0.0);
  EXPECT_NEAR(d.channels[2][0], 50.0 / 150.0, 1e-12);

  RgbTrace t2(25, {50, 100, 50}, {1, 1, 1}, {0, 1, 1});
  auto d2 = frame_difference_normalize(t2);
  EXPECT_NEAR(d2.channels[0][0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(d2.channels[0][1], -1.0 / 3.0, 1e-12);
}

TEST(FrameDifference, ExactIlluminationScaleInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> halves(2, 5);  // values in {1, 1.5, 2, 2.5}
  for (int trial = 0; trial < 20; ++trial) {
    std::array<std::vector<double>, 3> ch;
    for (auto& c : ch) {
      c.resize(64);
      for (auto& v : c) v = halves(rng) * 0.5;
    }
    RgbTrace t(30, ch[0], ch[1], ch[2]);
    auto base = frame_difference_normalize(t);
    for (double k : {0.5, 2.0, 100.0}) {
      auto d = frame_difference_normalize(t.scaled(k));
      for (int c = 0; c < 3; ++c) EXPECT_EQ(d.channels[c], base.channels[c]) << "k=" << k;
    }
  }
}

TEST(FrameDifference, ZeroDenominatorIsNumericalError) {
  RgbTrace t(25, {0, 0, 3}, {1, 1, 1}, {1, 1, 1});
  EXPECT_EQ(kind_of([&] { frame_difference_normalize(t); }), ErrorKind::Numerical);
}

TEST(WindowSplit, CountsAndOffsets) {
  SampledSeries s(25.0, std::vector<double>(250, 0.0), 2.0);
  auto w = window_split(s, 2.0, 1.0);
  ASSERT_EQ(w.size(), 9u);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(w[i].size(), 50u);
    EXPECT_DOUBLE_EQ(w[i].t0_s(), 2.0 + i * 1.0);
  }
  EXPECT_EQ(window_split(s, 249 / 25.0 + 0.02, 1.0).size(), 1u);
  EXPECT_THROW(window_split(s, 11.0, 1.0), Error);
  EXPECT_THROW(window_split(s, 1.0, 0.0), Error);
}

TEST(WindowSplit, DisjointTilingReproducesInput) {
  std::vector<double> x(1200);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * i) + i;
  auto w = window_split(SampledSeries(20.0, x), 10.0, 10.0);
  ASSERT_EQ(w.size(), 6u);
  std::vector<double> joined;
  for (const auto& s : w) joined.insert(joined.end(), s.values().begin(), s.values().end());
  EXPECT_EQ(joined, x);
}
