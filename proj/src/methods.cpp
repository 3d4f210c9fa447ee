#include "rppg/methods.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rppg/error.hpp"
#include "rppg/simd.hpp"

namespace rppg {
namespace {

double population_sd(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

void remove_mean(std::vector<double>& x) {
  const double m = simd::mean(x);
  for (double& v : x) v -= m;
}

}  // namespace

std::string_view method_name(MethodId m) {
  switch (m) {
    case MethodId::Green:
      return "GREEN";
    case MethodId::Chrom:
      return "CHROM";
    case MethodId::Pos:
      return "POS";
    case MethodId::Ica:
      return "ICA";
  }
  return "?";
}

std::optional<MethodId> parse_method(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (MethodId m : kAllMethods) {
    if (method_name(m) == upper) return m;
  }
  return std::nullopt;
}

void MethodConfig::validate() const {
  require(std::isfinite(pos_window_s) && pos_window_s > 0.0, "POS window must be positive");
  require(ica_max_iter > 0, "ICA iteration limit must be positive");
  require(std::isfinite(ica_tol) && ica_tol > 0.0, "ICA tolerance must be positive");
  band.validate();
  require(welch.seg_len_s > 0.0 && welch.overlap_frac >= 0.0 && welch.overlap_frac < 1.0,
          "invalid Welch parameters");
}

PulseSignal green(const RgbTrace& trace, double detrend_window_s) {
  return {MethodId::Green, detrend(trace.channel_series(Channel::G), detrend_window_s)};
}

PulseSignal chrom(const RgbTrace& trace, const MethodConfig& config) {
  const double fs = trace.sample_rate_hz();
  const std::size_t n = trace.size();
  require(static_cast<double>(n) >= 2.0 * fs, "CHROM needs at least 2 s of frames");

  std::array<std::vector<double>, 3> norm;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto v = trace.channel(static_cast<Channel>(c));
    const double mu = simd::mean(v);
    if (mu == 0.0) fail(ErrorKind::Numerical, "CHROM: channel with zero temporal mean");
    norm[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) norm[c][i] = v[i] / mu;
  }
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = 3.0 * norm[0][i] - 2.0 * norm[1][i];
    ys[i] = 1.5 * norm[0][i] + norm[1][i] - 1.5 * norm[2][i];
  }
  const auto xf = std::move(bandpass(SampledSeries(fs, std::move(xs)), config.band)).take_values();
  const auto yf = std::move(bandpass(SampledSeries(fs, std::move(ys)), config.band)).take_values();
  const double sx = population_sd(xf, simd::mean(xf));
  const double sy = population_sd(yf, simd::mean(yf));

  std::vector<double> s(xf);
  if (sy > 0.0) simd::kernels().axpb_accumulate(-sx / sy, yf.data(), 0.0, s.data(), n);
  remove_mean(s);
  return {MethodId::Chrom, SampledSeries(fs, std::move(s), trace.t0_s())};
}

PulseSignal pos(const RgbTrace& trace, double window_s) {
  const double fs = trace.sample_rate_hz();
  const std::size_t n = trace.size();
  require(std::isfinite(window_s) && window_s > 0.0, "POS window must be positive");
  const auto len = static_cast<std::size_t>(std::llround(window_s * fs));
  require(len >= 2, "POS window must span at least two frames");
  if (len > n) {
    fail(ErrorKind::InvalidArgument, "POS window of " + std::to_string(len) + " frames exceeds trace length " +
                                         std::to_string(n));
  }
  const auto& k = simd::kernels();
  const auto r = trace.r(), g = trace.g(), b = trace.b();

  std::vector<double> out(n, 0.0), s1(len), s2(len);
  for (std::size_t m = 0; m + len <= n; ++m) {
    const double mr = k.sum(r.data() + m, len) / static_cast<double>(len);
    const double mg = k.sum(g.data() + m, len) / static_cast<double>(len);
    const double mb = k.sum(b.data() + m, len) / static_cast<double>(len);
    if (mr == 0.0 || mg == 0.0 || mb == 0.0) {
      fail(ErrorKind::Numerical, "POS: zero channel mean in window at frame " + std::to_string(m));
    }
    for (std::size_t i = 0; i < len; ++i) {
      const double rn = r[m + i] / mr, gn = g[m + i] / mg, bn = b[m + i] / mb;
      s1[i] = gn - bn;
      s2[i] = -2.0 * rn + gn + bn;
    }
    const double mu1 = simd::mean(s1), mu2 = simd::mean(s2);
    const double sd1 = population_sd(s1, mu1), sd2 = population_sd(s2, mu2);
    const double alpha = sd2 > 0.0 ? sd1 / sd2 : 0.0;
    // out += (s1 - mu1) + alpha * (s2 - mu2)
    k.axpb_accumulate(1.0, s1.data(), -mu1 - alpha * mu2, out.data() + m, len);
    if (alpha != 0.0) k.axpb_accumulate(alpha, s2.data(), 0.0, out.data() + m, len);
  }
  return {MethodId::Pos, SampledSeries(fs, std::move(out), trace.t0_s())};
}

namespace {

double in_band_peak_ratio(const std::vector<double>& component, double fs, const MethodConfig& config) {
  const SampledSeries s(fs, component);
  WelchOptions opt = config.welch;
  if (std::llround(opt.seg_len_s * fs) > static_cast<long long>(s.size())) {
    opt.seg_len_s = static_cast<double>(s.size()) / fs;
  }
  const PsdEstimate psd = welch_psd(s, opt);
  double total = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < psd.density.size(); ++i) {
    total += psd.density[i];
    if (psd.freqs_hz[i] >= config.band.low_hz && psd.freqs_hz[i] <= config.band.high_hz) {
      peak = std::max(peak, psd.density[i]);
    }
  }
  return total > 0.0 ? peak / total : 0.0;
}

void orthonormalize(Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& found) {
  for (const auto& u : found) w -= w.dot(u) * u;
  const double norm = w.norm();
  if (norm > 0.0) w /= norm;
}

}  // namespace

IcaResult ica_detailed(const RgbTrace& trace, const MethodConfig& config) {
  config.validate();
  const double fs = trace.sample_rate_hz();
  const std::size_t n = trace.size();
  require(n >= 30, "ICA needs at least 30 frames (10 per channel)");
  const auto& k = simd::kernels();

  // z-score
  std::array<std::vector<double>, 3> z;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto v = trace.channel(static_cast<Channel>(c));
    const double mu = simd::mean(v);
    const double sd = population_sd(v, mu);
    if (!(sd > 0.0)) fail(ErrorKind::Numerical, "ICA input has a zero-variance channel");
    z[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) z[c][i] = (v[i] - mu) / sd;
  }

  // PCA whitening; dimensions with negligible variance are dropped (noise-free
  // inputs with fewer than three sources are rank deficient).
  Eigen::Matrix3d cov;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) cov(a, b) = cov(b, a) = k.dot(z[a].data(), z[b].data(), n) / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda(2);
  std::vector<std::vector<double>> white;
  for (int e = 2; e >= 0; --e) {
    if (!(lambda(e) > 1e-10 * lmax)) break;
    Eigen::Vector3d dir = eig.eigenvectors().col(e) / std::sqrt(lambda(e));
    // Sign fixed by channel-order-free sums so permuted channels whiten alike.
    const double s1 = dir.sum();
    const double s3 = dir.array().cube().sum();
    if (s1 < -1e-12 || (std::fabs(s1) <= 1e-12 && s3 < 0.0)) dir = -dir;
    std::vector<double> row(n, 0.0);
    for (int c = 0; c < 3; ++c) k.axpb_accumulate(dir(c), z[c].data(), 0.0, row.data(), n);
    white.push_back(std::move(row));
  }
  const auto dims = static_cast<Eigen::Index>(white.size());

  // Deflationary FastICA with g = tanh.
  std::mt19937_64 rng(config.ica_seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Eigen::VectorXd> found;
  std::vector<double> y(n), gy(n);
  bool converged = true;
  int iterations = 0;
  for (Eigen::Index p = 0; p < dims; ++p) {
    Eigen::VectorXd w(dims);
    for (Eigen::Index j = 0; j < dims; ++j) w(j) = uniform(rng);
    orthonormalize(w, found);
    bool done = false;
    for (int it = 0; it < config.ica_max_iter && !done; ++it) {
      ++iterations;
      std::fill(y.begin(), y.end(), 0.0);
      for (Eigen::Index j = 0; j < dims; ++j) k.axpb_accumulate(w(j), white[j].data(), 0.0, y.data(), n);
      double mean_dg = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gy[i] = std::tanh(y[i]);
        mean_dg += 1.0 - gy[i] * gy[i];
      }
      mean_dg /= static_cast<double>(n);
      Eigen::VectorXd next(dims);
      for (Eigen::Index j = 0; j < dims; ++j) {
        next(j) = k.dot(white[j].data(), gy.data(), n) / static_cast<double>(n) - mean_dg * w(j);
      }
      orthonormalize(next, found);
      done = std::abs(1.0 - std::abs(next.dot(w))) < config.ica_tol;
      w = next;
    }
    converged = converged && done;
    found.push_back(w);
  }

  IcaResult result{PulseSignal{MethodId::Ica, SampledSeries(fs, {0.0})}, {}, 0, {}, converged, iterations};
  if (converged) {
    for (const auto& w : found) {
      std::vector<double> s(n, 0.0);
      for (Eigen::Index j = 0; j < dims; ++j) k.axpb_accumulate(w(j), white[j].data(), 0.0, s.data(), n);
      result.components.push_back(std::move(s));
    }
  } else {
    result.components = white;
  }

  for (const auto& comp : result.components) result.peak_ratio.push_back(in_band_peak_ratio(comp, fs, config));
  result.selected = static_cast<std::size_t>(
      std::distance(result.peak_ratio.begin(), std::max_element(result.peak_ratio.begin(), result.peak_ratio.end())));

  // Orient the selected source like the green channel (sign is arbitrary otherwise).
  std::vector<double> chosen = result.components[result.selected];
  if (k.dot(chosen.data(), z[1].data(), n) < 0.0) {
    for (double& v : chosen) v = -v;
  }
  result.pulse = PulseSignal{MethodId::Ica, SampledSeries(fs, std::move(chosen), trace.t0_s())};
  return result;
}

PulseSignal ica(const RgbTrace& trace, const MethodConfig& config) { return ica_detailed(trace, config).pulse; }

PulseSignal run_method(MethodId method, const RgbTrace& trace, const MethodConfig& config) {
  switch (method) {
    case MethodId::Green:
      return green(trace);
    case MethodId::Chrom:
      return chrom(trace, config);
    case MethodId::Pos:
      return pos(trace, config.pos_window_s);
    case MethodId::Ica:
      return ica(trace, config);
  }
  fail(ErrorKind::InvalidArgument, "unknown method");
}

}  // namespace rppg
