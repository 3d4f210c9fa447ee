#include <algorithm>
#include <cstdio>
#include <string>

#include "rppg/cli.hpp"

namespace rppg::cli {
namespace {

constexpr double kWidth = 800.0;
constexpr double kPanelHeight = 220.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Polyline of (x, y) samples scaled into the panel whose top edge is `top`.
std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, double top, const char* color) {
  if (xs.empty()) return {};
  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  const double xspan = std::max(*xmax_it - *xmin_it, 1e-12);
  const double yspan = std::max(*ymax_it - *ymin_it, 1e-300);
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = kMargin + (xs[i] - *xmin_it) / xspan * (kWidth - 2 * kMargin);
    const double y = top + kPanelHeight - (ys[i] - *ymin_it) / yspan * kPanelHeight;
    pts += num(x) + "," + num(y) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_svg(const SampledSeries& pulse, const PsdEstimate& psd, const HrEstimate& hr,
                       std::string_view title) {
  const double height = 2 * kPanelHeight + 3 * kMargin;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kMargin) + "\" y=\"20\">" + std::string(title) + " pulse</text>\n";

  std::vector<double> t(pulse.size()), v(pulse.values().begin(), pulse.values().end());
  for (std::size_t i = 0; i < pulse.size(); ++i) t[i] = pulse.time_at(i);
  svg += polyline(t, v, kMargin, "#1f77b4");

  // Spectrum up to twice the band edge.
  const double fmax = 2.0 * hr.band.high_hz;
  std::vector<double> f, d;
  for (std::size_t i = 0; i < psd.freqs_hz.size() && psd.freqs_hz[i] <= fmax; ++i) {
    f.push_back(psd.freqs_hz[i]);
    d.push_back(psd.density[i]);
  }
  const double top = 2 * kMargin + kPanelHeight;
  svg += "<text x=\"" + num(kMargin) + "\" y=\"" + num(top - 8) + "\">PSD, peak " + num(hr.bpm) + " BPM (" +
         num(hr.snr_db) + " dB)</text>\n";
  svg += polyline(f, d, top, "#d62728");
  if (!f.empty()) {
    const double x = kMargin + (hr.peak_hz - f.front()) / std::max(f.back() - f.front(), 1e-12) * (kWidth - 2 * kMargin);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(top + kPanelHeight) + "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rppg::cli
