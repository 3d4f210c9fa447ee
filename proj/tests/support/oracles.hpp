#pragma once

// Straightforward reference implementations used as test oracles. Nothing
// here calls into the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// One-sided Hann periodogram of the first `n` samples, evaluated by a direct
// O(n * nfft) DFT in long double. Scaled to a density (per Hz).
inline std::vector<double> hann_periodogram(const std::vector<double>& x, double fs, std::size_t nfft) {
  const std::size_t n = x.size();
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<long double> w(n);
  long double wss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5L - 0.5L * std::cos(2 * pi * static_cast<long double>(i) / static_cast<long double>(n));
    wss += w[i] * w[i];
  }
  std::vector<double> out(nfft / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double ang = -2 * pi * static_cast<long double>(k) * static_cast<long double>(i) /
                              static_cast<long double>(nfft);
      re += w[i] * x[i] * std::cos(ang);
      im += w[i] * x[i] * std::sin(ang);
    }
    long double p = (re * re + im * im) / (static_cast<long double>(fs) * wss);
    const bool edge = k == 0 || (nfft % 2 == 0 && k == nfft / 2);
    if (!edge) p *= 2;
    out[k] = static_cast<double>(p);
  }
  return out;
}

inline double brute_mae(const std::vector<double>& gt, const std::vector<double>& est) {
  long double s = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) s += std::fabs(static_cast<long double>(gt[i]) - est[i]);
  return static_cast<double>(s / gt.size());
}

// Sample standard deviation of |gt - est| over sqrt(n), two-pass.
inline double brute_se(const std::vector<double>& gt, const std::vector<double>& est) {
  const std::size_t n = gt.size();
  std::vector<long double> e(n);
  long double m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = std::fabs(static_cast<long double>(gt[i]) - est[i]);
    m += e[i];
  }
  m /= n;
  long double ss = 0;
  for (auto v : e) ss += (v - m) * (v - m);
  return static_cast<double>(std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<long double>(n)));
}

// |H(e^{j 2 pi f / fs})| of a cascade of (b0, b1, b2, a1, a2) sections.
template <class Sections>
double cascade_gain(const Sections& sections, double f, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  std::complex<double> h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z1 * z1) / (1.0 + s.a1 * z1 + s.a2 * z1 * z1);
  }
  return std::abs(h);
}

inline std::vector<double> tone(double freq_hz, double fs, std::size_t n, double amp = 1.0, double phase = 0.0,
                                double offset = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = offset + amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
  }
  return x;
}

// Argmax bin frequency of a density restricted to [lo, hi].
inline double peak_freq(const std::vector<double>& density, double bin_hz, double lo, double hi) {
  std::size_t best = 0;
  bool any = false;
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double f = k * bin_hz;
    if (f < lo || f > hi) continue;
    if (!any || density[k] > density[best]) best = k;
    any = true;
  }
  return best * bin_hz;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

inline double max_abs(const std::vector<double>& x, std::size_t skip = 0) {
  double m = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace oracle
