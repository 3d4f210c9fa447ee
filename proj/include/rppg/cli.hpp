#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/spectral.hpp"

namespace rppg::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

/// Entry point shared by the `rppg` binary and the tests. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Static SVG: filtered pulse on top, PSD below with the chosen peak marked.
std::string render_svg(const SampledSeries& pulse, const PsdEstimate& psd, const HrEstimate& hr,
                       std::string_view title);

}  // namespace rppg::cli
