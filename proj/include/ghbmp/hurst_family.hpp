#pragma once

#include "ghbmp/haar_kernel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ghbmp {

/// Raised when a family produces a value outside its declared range, or is
/// asked for something it cannot provide.
class FamilyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sequence of Hurst functions H_j : [0, 1] -> [h_lo, h_hi], one per
/// resolution level, with an optional closed-form pointwise limit.
///
/// Immutable after construction and safe to share between threads.
class HurstFamily {
public:
    using Evaluator = std::function<double(unsigned level, double t)>;
    using Limit = std::function<double(double t)>;
    using ExactNorm = std::function<double(unsigned level)>;

    struct Spec {
        std::string name;
        std::vector<double> params;
        Evaluator evaluator;
        double h_lo = 0.0;
        double h_hi = 0.0;
        std::optional<Limit> limit;
        /// true when H_j does not depend on j
        bool level_invariant = false;
        /// Closed-form Lipschitz norm of H_j, when known.
        std::optional<ExactNorm> exact_norm;
    };

    explicit HurstFamily(Spec spec);

    [[nodiscard]] const std::string& name() const noexcept { return spec_.name; }
    [[nodiscard]] const std::vector<double>& params() const noexcept { return spec_.params; }
    [[nodiscard]] double h_lo() const noexcept { return spec_.h_lo; }
    [[nodiscard]] double h_hi() const noexcept { return spec_.h_hi; }
    [[nodiscard]] bool has_limit() const noexcept { return spec_.limit.has_value(); }
    [[nodiscard]] bool level_invariant() const noexcept { return spec_.level_invariant; }
    [[nodiscard]] bool has_exact_norm() const noexcept { return spec_.exact_norm.has_value(); }

    /// H_j(t), unchecked.
    [[nodiscard]] double operator()(unsigned level, double t) const { return spec_.evaluator(level, t); }

    /// Closed-form norm; throws FamilyError when the family has none.
    [[nodiscard]] double exact_norm(unsigned level) const;

    /// Canonical "name:p1,p2" rendering, parseable by parse_family().
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] const Spec& spec() const noexcept { return spec_; }

private:
    Spec spec_;
};

/// H(t) == h.
[[nodiscard]] HurstFamily constant_family(double h);
/// H(t) = intercept + slope * t.
[[nodiscard]] HurstFamily linear_family(double intercept, double slope);
/// H(t) = center - amplitude * sin(2 pi cycles t). Defaults give 0.5 - 0.4 sin(6 pi t).
[[nodiscard]] HurstFamily sinusoidal_family(double center = 0.5, double amplitude = 0.4, double cycles = 3.0);
/// Level-dependent ramp from 1/4 to 3/4 of width 1/j centred at 1/2, whose
/// limit jumps from 1/4 to 3/4 at t = 1/2. H_0 is the constant 1/2.
[[nodiscard]] HurstFamily ramp_family();
/// User-supplied family. The range is validated lazily, on every h_jk call.
[[nodiscard]] HurstFamily custom_family(std::string name, HurstFamily::Evaluator evaluator, double h_lo,
                                        double h_hi, std::optional<HurstFamily::Limit> limit = std::nullopt);

/// Parses "constant:0.5", "linear:0.2,0.45", "sinusoidal", "sinusoidal:0.5,0.4,3"
/// or "ramp". Throws std::invalid_argument on anything else.
[[nodiscard]] HurstFamily parse_family(const std::string& text);

/// H_{j,k} = H_j(k / 2^j), checked against [h_lo, h_hi].
[[nodiscard]] double h_jk(const HurstFamily& family, const HaarIndex& idx);

struct LipschitzEstimate {
    unsigned level = 0;
    double nu = 0.0;
    double grid_step = 0.0;
};

/// Grid estimate of sup|H_j| + sup slope over [0, 1]. A lower bound on the
/// true norm that tightens as grid_step shrinks.
[[nodiscard]] LipschitzEstimate lipschitz_norm(const HurstFamily& family, unsigned level, double grid_step);

/// Grid step used by check_growth at a given level.
[[nodiscard]] double growth_check_step(unsigned level) noexcept;

/// True iff the estimated norm satisfies nu_j <= C (1 + j) for all j <= j_max.
[[nodiscard]] bool check_growth(const HurstFamily& family, double growth_constant, unsigned j_max);

/// Closed-form H(t) = liminf_j H_j(t); throws FamilyError if unknown.
[[nodiscard]] double limit_hurst(const HurstFamily& family, double t);

/// The pointwise limit if known, else H_level(t). Used as "true" curve.
[[nodiscard]] double target_hurst(const HurstFamily& family, double t, unsigned level);

/// Checks H(t) < h_lo + 1/2 on a probe grid in (0, 1). A false result is a
/// warning only; simulations remain valid.
[[nodiscard]] bool satisfies_regularity_condition(const HurstFamily& family, unsigned probe_level = 24);

}  // namespace ghbmp
