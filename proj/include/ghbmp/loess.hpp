#pragma once

#include <span>
#include <vector>

namespace ghbmp {

/// Degree-1 LOESS with tricube weights, one pass, no robustness iterations.
///
/// For each x_i the neighbourhood is the ceil(span * P) nearest points; the
/// bandwidth is the distance to the farthest of them. Falls back to the
/// weighted mean when the local design is degenerate.
/// Requires xs.size() == ys.size() >= 3 and span * P >= 2.
[[nodiscard]] std::vector<double> loess_smooth(std::span<const double> xs, std::span<const double> ys,
                                               double span);

}  // namespace ghbmp
