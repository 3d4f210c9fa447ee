#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rppg/signal.hpp"
#include "rppg/spectral.hpp"

namespace rppg {

enum class MethodId { Green, Chrom, Pos, Ica };

inline constexpr std::array<MethodId, 4> kAllMethods{MethodId::Green, MethodId::Chrom, MethodId::Pos,
                                                     MethodId::Ica};

std::string_view method_name(MethodId m);
/// Case-insensitive; nullopt for unknown names.
std::optional<MethodId> parse_method(std::string_view name);

/// Estimated blood-volume pulse on the clock of its source trace.
struct PulseSignal {
  MethodId method;
  SampledSeries signal;
};

struct MethodConfig {
  double pos_window_s = 1.6;
  std::uint64_t ica_seed = 0;
  int ica_max_iter = 200;
  double ica_tol = 1e-6;
  /// CHROM filters its chrominance signals with this band; ICA ranks
  /// components by their spectral peak inside it.
  BandLimits band = kDefaultHrBand;
  WelchOptions welch;

  void validate() const;
};

/// Detrended green channel.
PulseSignal green(const RgbTrace& trace, double detrend_window_s = kDefaultDetrendWindowS);

/// Chrominance method: mean-normalized channels, X = 3R - 2G, Y = 1.5R + G - 1.5B,
/// both band-passed, S = X - (sd X / sd Y) Y.
PulseSignal chrom(const RgbTrace& trace, const MethodConfig& config = {});

/// Plane-orthogonal-to-skin: sliding window (hop 1 frame) of window-mean
/// normalized RGB projected on (0, 1, -1) and (-2, 1, 1), tuned by the sd ratio
/// and overlap-added.
PulseSignal pos(const RgbTrace& trace, double window_s = 1.6);

struct IcaResult {
  PulseSignal pulse;
  /// Unmixed sources (one per retained whitened dimension), unit variance.
  std::vector<std::vector<double>> components;
  std::size_t selected = 0;
  /// In-band peak density over total density, per component.
  std::vector<double> peak_ratio;
  bool converged = true;
  int iterations = 0;
};

/// z-score, PCA whitening, deflationary FastICA (tanh contrast) with seeded
/// initial vectors, then the component with the largest in-band spectral
/// peak ratio. On non-convergence the whitened PCA components are ranked instead.
IcaResult ica_detailed(const RgbTrace& trace, const MethodConfig& config = {});
PulseSignal ica(const RgbTrace& trace, const MethodConfig& config = {});

PulseSignal run_method(MethodId method, const RgbTrace& trace, const MethodConfig& config = {});

}  // namespace rppg
