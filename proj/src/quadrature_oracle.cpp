#include "ghbmp/quadrature_oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace ghbmp::oracle {

namespace {

constexpr int kMaxGradedCells = 200;
constexpr unsigned kMaxDepth = 6;

// Integrates u^beta over [lo, hi] with 0 <= lo < hi. Two Kronrod rules of
// different order; their disagreement bounds the error of the lower one and
// so, conservatively, of the higher one.
double adaptive_cell(double beta, double lo, double hi, double tol) {
    auto integrand = [beta](double u) { return u > 0.0 ? std::pow(u, beta) : 0.0; };
    using boost::math::quadrature::gauss_kronrod;
    const double low = gauss_kronrod<double, 21>::integrate(integrand, lo, hi, kMaxDepth, 1e-13);
    const double high = gauss_kronrod<double, 61>::integrate(integrand, lo, hi, kMaxDepth, 1e-13);
    const double error = std::abs(high - low);
    if (!(error <= tol + 1e-14 * std::abs(high))) {
        char message[160];
        std::snprintf(message, sizeof(message), "Kronrod rules disagree by %.3g (budget %.3g) on [%.17g, %.17g]",
                      error, tol, lo, hi);
        throw OracleFailure(message);
    }
    return high;
}

}  // namespace

double power_segment_integral(double x, double beta, double a, double b, double tol) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("quadrature tolerance must be positive");
    }
    if (!(beta > -1.0)) {
        throw std::invalid_argument("power exponent must exceed -1");
    }
    if (!(std::min(b, x) > a)) {
        return 0.0;
    }
    // In u = x - s the range is [u_lo, u_hi] and the singular point is u = 0,
    // so the graded cells below have exact endpoints.
    const double u_lo = std::max(x - b, 0.0);
    const double u_hi = x - a;
    const double cell_budget = tol / (2.0 * kMaxGradedCells);
    double total = 0.0;
    double width = u_hi - u_lo;
    if (u_lo > 0.0) {
        // smooth, but possibly close to the singularity: grade towards u_lo
        // until cells are no wider than their distance to 0
        for (int cell = 0; cell < kMaxGradedCells && width > u_lo; ++cell) {
            const double half = width / 2.0;
            total += adaptive_cell(beta, u_lo + half, u_lo + width, cell_budget);
            width = half;
        }
        return total + adaptive_cell(beta, u_lo, u_lo + width, cell_budget);
    }

    // Singular endpoint: cells [w / 2, w], then the exact integral over [0, w].
    const double exact_tail_budget = tol / 4.0;
    for (int cell = 0; cell < kMaxGradedCells; ++cell) {
        const double tail = std::pow(width, beta + 1.0) / (beta + 1.0);
        if (tail <= exact_tail_budget) {
            return total + tail;
        }
        const double half = width / 2.0;
        total += adaptive_cell(beta, half, width, cell_budget);
        width = half;
    }
    throw OracleFailure("graded mesh exhausted before the singular tail became negligible");
}

double kernel_quadrature(KernelParam lambda, double x, double tol) {
    const double beta = lambda.value() - 0.5;
    const double positive = power_segment_integral(x, beta, 0.0, 0.5, tol / 2.0);
    const double negative = power_segment_integral(x, beta, 0.5, 1.0, tol / 2.0);
    return positive - negative;
}

double coefficient_quadrature(double hurst, const HaarIndex& idx, double t, double tol) {
    idx.validate();
    const double beta = hurst - 0.5;
    const int j = static_cast<int>(idx.level);
    const double k = static_cast<double>(idx.position);
    const double s0 = std::ldexp(k, -j);
    const double s1 = std::ldexp(k + 0.5, -j);
    const double s2 = std::ldexp(k + 1.0, -j);
    const double amplitude = std::sqrt(std::ldexp(1.0, j));
    // amplitude multiplies the error, so shrink the per-segment budget
    const double segment_tol = tol / (2.0 * amplitude);
    const double positive = power_segment_integral(t, beta, s0, s1, segment_tol);
    const double negative = power_segment_integral(t, beta, s1, s2, segment_tol);
    return amplitude * (positive - negative);
}

}  // namespace ghbmp::oracle
