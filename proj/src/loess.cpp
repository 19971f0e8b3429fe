#include "ghbmp/loess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ghbmp {

std::vector<double> loess_smooth(std::span<const double> xs, std::span<const double> ys, double span) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("loess: xs and ys differ in length");
    }
    const std::size_t n = xs.size();
    if (n < 3) {
        throw std::invalid_argument("loess: need at least 3 points");
    }
    if (!(span > 0.0 && span <= 1.0) || span * static_cast<double>(n) < 2.0) {
        throw std::invalid_argument("loess: span must lie in (0, 1] with span * P >= 2");
    }
    const auto q = std::min(n, static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))));

    std::vector<double> fitted(n);
    std::vector<double> distance(n);
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = xs[i];
        for (std::size_t m = 0; m < n; ++m) {
            distance[m] = std::abs(xs[m] - x0);
        }
        std::vector<double> sorted = distance;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
        const double bandwidth = sorted[q - 1];

        double w_sum = 0.0;
        double wx = 0.0;
        double wy = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            double w = 0.0;
            if (bandwidth > 0.0 && distance[m] < bandwidth) {
                const double u = distance[m] / bandwidth;
                const double c = 1.0 - u * u * u;
                w = c * c * c;
            } else if (bandwidth == 0.0 && distance[m] == 0.0) {
                w = 1.0;
            }
            weight[m] = w;
            w_sum += w;
            wx += w * xs[m];
            wy += w * ys[m];
        }
        const double x_bar = wx / w_sum;
        const double y_bar = wy / w_sum;
        double sxx = 0.0;
        double sxy = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double dx = xs[m] - x_bar;
            sxx += weight[m] * dx * dx;
            sxy += weight[m] * dx * (ys[m] - y_bar);
        }
        // degenerate local design: all weighted xs coincide
        if (!(sxx > 1e-14 * w_sum * std::max(bandwidth * bandwidth, 1e-300))) {
            fitted[i] = y_bar;
        } else {
            fitted[i] = y_bar + (sxy / sxx) * (x0 - x_bar);
        }
    }
    return fitted;
}

}  // namespace ghbmp
