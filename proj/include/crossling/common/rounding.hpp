/// @file rounding.hpp
/// @brief Decimal rounding used for every reported number.

#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace crossling {

/// Rounds half away from zero at @p decimals places. The scaled value is
/// nudged by a few ulps so that e.g. 0.125 at 2 places gives 0.13 even though
/// 0.125 * 100 is not exactly representable in every case.
inline double round_half_away(double x, int decimals) {
    if (!std::isfinite(x)) return x;
    const double scale = std::pow(10.0, decimals);
    const double scaled = x * scale;
    const double nudged = scaled + std::copysign(std::abs(scaled) * 4.0 * 2.220446049250313e-16, scaled);
    return std::round(nudged) / scale;
}

/// Fixed-point text after round_half_away.
inline std::string format_fixed(double x, int decimals) {
    const double r = round_half_away(x, decimals);
    return fmt::format("{:.{}f}", r == 0.0 ? 0.0 : r, decimals);
}

}  // namespace crossling
