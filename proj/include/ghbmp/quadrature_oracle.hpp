#pragma once

#include "ghbmp/haar_kernel.hpp"

#include <stdexcept>

// Numerical reference values for the closed-form kernel and series
// coefficients. Nothing in the simulation path calls into this header; it
// exists so tests and the `selftest` command can check the closed forms
// against an independent computation.

namespace ghbmp::oracle {

/// Raised when adaptive quadrature cannot meet its tolerance.
class OracleFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerically integrates (x - s)_+^beta over s in [a, b], beta > -1.
///
/// When the singular point s = x falls inside [a, b] the range is cut there
/// and the piece below x is covered by a geometric mesh graded towards x,
/// each cell integrated by two Gauss-Kronrod rules of different order whose
/// disagreement is the error estimate. Only the innermost cell,
/// whose contribution is below tol / 4, uses the antiderivative.
[[nodiscard]] double power_segment_integral(double x, double beta, double a, double b, double tol);

/// Integral form of the fractional Haar kernel:
///   int (x - s)_+^(l - 1/2) h(s) ds, split at {0, 1/2, 1} and at s = x.
[[nodiscard]] double kernel_quadrature(KernelParam lambda, double x, double tol);

/// The series coefficient as written in the synthesis formula, before any
/// change of variable:  int_0^1 (t - s)_+^(H - 1/2) h_jk(s) ds.
[[nodiscard]] double coefficient_quadrature(double hurst, const HaarIndex& idx, double t, double tol);

}  // namespace ghbmp::oracle
