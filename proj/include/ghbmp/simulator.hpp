#pragma once

#include "ghbmp/haar_kernel.hpp"
#include "ghbmp/hurst_family.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghbmp {

/// Raised before any synthesis work starts when a request is malformed or
/// would exceed its cost budget.
class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    unsigned J = 12;  ///< finest Haar level included in the truncated series
    unsigned n = 10;  ///< grid t_i = i / 2^n, i = 0..2^n
    std::uint64_t seed = 1;
    /// 0 sums every contributing term. A positive value drops far-field terms
    /// whose envelope falls below tail_tol * 2^(-j h_lo).
    double tail_tol = 0.0;
    /// Upper bound on (kernel term, realization) updates for one request.
    double max_updates = 4.0e12;

    /// Throws PlanningError on out-of-range fields.
    void validate() const;
};

struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    SimConfig config;
    std::string family;  ///< HurstFamily::describe()
    double dropped_variance_bound = 0.0;

    [[nodiscard]] std::uint64_t config_hash() const;
};

/// int_0^1 (t - s)_+^(H_jk - 1/2) h_jk(s) ds = 2^(-j H_jk) h^[H_jk](2^j t - k).
[[nodiscard]] double coefficient(const HurstFamily& family, const HaarIndex& idx, double t);

/// E X_J(t)^2 = sum of squared coefficients up to level J.
[[nodiscard]] double variance(const HurstFamily& family, double t, unsigned J);

/// Cov(X_J(t), X_J(t2)).
[[nodiscard]] double covariance(const HurstFamily& family, double t, double t2, unsigned J);

/// Worst-case variance of the terms dropped by a tail cutoff, uniform over t.
[[nodiscard]] double dropped_variance_bound(const HurstFamily& family, unsigned J, double tail_tol);

/// One realization of X_J on the grid i / 2^n.
[[nodiscard]] PathSample simulate_path(const HurstFamily& family, const SimConfig& config, unsigned workers = 1);

/// Realizations for each seed in `seeds` (config.seed is ignored). Output
/// order follows `seeds`; every path is bit-identical to simulate_path with
/// the same seed.
[[nodiscard]] std::vector<PathSample> simulate_paths(const HurstFamily& family, const SimConfig& config,
                                                     std::span<const std::uint64_t> seeds, unsigned workers = 1);

/// X_J at a subset of the dyadic grid, given by grid indices in [0, 2^n]
/// (any order, duplicates allowed). Result is [seed][point]. Values agree
/// bit-for-bit with the corresponding entries of simulate_path.
[[nodiscard]] std::vector<std::vector<double>> sample_grid_points(const HurstFamily& family, const SimConfig& config,
                                                                  std::span<const std::uint64_t> grid_indices,
                                                                  std::span<const std::uint64_t> seeds,
                                                                  unsigned workers = 1);

/// X_J at arbitrary times in [0, 1]. Result is [seed][point].
[[nodiscard]] std::vector<std::vector<double>> sample_points(const HurstFamily& family, unsigned J,
                                                             std::span<const double> times,
                                                             std::span<const std::uint64_t> seeds,
                                                             unsigned workers = 1);

/// X(K / 2^J) - 2 X((2K + 1) / 2^(J+1)) + X((K + 1) / 2^J), read off the
/// path grid. Requires J + 1 <= n and 0 <= K < 2^J.
[[nodiscard]] double second_difference(const PathSample& path, unsigned J, std::int64_t K);

}  // namespace ghbmp
