#pragma once

#include "ghbmp/hurst_family.hpp"
#include "ghbmp/simulator.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace ghbmp {

/// Raised when the estimator cannot be applied with the given resolution,
/// partition or path.
class EstimatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EstimatorConfig {
    std::uint64_t N = 2048;  ///< coarse sampling resolution; the fine one is Q N
    unsigned Q = 2;
    unsigned L = 2;          ///< filter order
    unsigned P = 100;        ///< number of equal subintervals of [0, 1]
    double span = 0.25;      ///< LOESS neighbourhood fraction

    void validate() const;
};

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// P equal closed intervals [p/P, (p+1)/P].
[[nodiscard]] std::vector<Interval> uniform_partition(unsigned P);

struct EstimateSeries {
    std::vector<double> interval_mids;
    std::vector<double> h_raw;
    std::vector<double> h_smooth;
    /// Intervals where both variations vanished and the estimate was set to 0.
    std::vector<std::size_t> degenerate;
    EstimatorConfig config;
};

/// Supplies X(i / resolution) for i = 0..resolution.
class PathSource {
public:
    virtual ~PathSource() = default;
    [[nodiscard]] virtual std::vector<double> samples(std::uint64_t resolution) const = 0;
};

/// Reads samples off a path on the grid i / 2^n by striding. Only resolutions
/// dividing 2^n are available.
class GridPathSource final : public PathSource {
public:
    explicit GridPathSource(std::span<const double> grid_values);
    [[nodiscard]] std::vector<double> samples(std::uint64_t resolution) const override;

private:
    std::vector<double> values_;
};

/// Evaluates the truncated series directly at the requested points, for
/// resolutions that are not on a dyadic grid.
class SeriesPathSource final : public PathSource {
public:
    SeriesPathSource(HurstFamily family, unsigned J, std::uint64_t seed, unsigned workers = 1);
    [[nodiscard]] std::vector<double> samples(std::uint64_t resolution) const override;

private:
    HurstFamily family_;
    unsigned J_;
    std::uint64_t seed_;
    unsigned workers_;
};

/// a_l = (-1)^(L-l) binom(L, l), l = 0..L, in exact integer arithmetic.
[[nodiscard]] std::vector<std::int64_t> increment_filter_exact(unsigned L);
[[nodiscard]] std::vector<double> increment_filter(unsigned L);

/// d_{N,k} = sum_l a_l X((k + l) / N) for k = 0..N-L, where
/// samples[i] = X(i / N).
[[nodiscard]] std::vector<double> generalized_increments(std::span<const double> samples, unsigned L);

/// Indices k in [0, N - L] with k / N inside the interval.
struct IndexRange {
    std::uint64_t first = 0;
    std::uint64_t count = 0;
};
[[nodiscard]] IndexRange variation_support(std::uint64_t N, unsigned L, const Interval& interval);

/// Mean of d_{N,k}^2 over the support of the interval. Throws EstimatorError
/// when the support is empty.
[[nodiscard]] double quadratic_variation(std::span<const double> increments, std::uint64_t N, unsigned L,
                                         const Interval& interval);

/// clamp(log_{Q^2}(coarse / fine), 0, 1) with the degenerate conventions
/// 0/0 -> 0 and positive/0 -> 1. `degenerate` is set for 0/0.
[[nodiscard]] double hurst_from_variations(double coarse, double fine, unsigned Q, bool* degenerate = nullptr);

/// Raw and smoothed Hurst estimates on each interval.
[[nodiscard]] EstimateSeries estimate_hurst(const PathSource& source, const EstimatorConfig& config,
                                            std::span<const Interval> intervals);

/// Convenience overload using uniform_partition(config.P).
[[nodiscard]] EstimateSeries estimate_hurst(const PathSource& source, const EstimatorConfig& config);

/// Default N for a path on the grid 2^n: the fine resolution Q N is the full grid.
[[nodiscard]] std::uint64_t default_resolution(unsigned n, unsigned Q);

}  // namespace ghbmp
