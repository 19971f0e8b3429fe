#include "ghbmp/estimator.hpp"

#include "ghbmp/loess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace ghbmp {

void EstimatorConfig::validate() const {
    if (Q < 2) {
        throw EstimatorError("Q must be at least 2, got " + std::to_string(Q));
    }
    if (L < 2) {
        throw EstimatorError("L must be at least 2, got " + std::to_string(L));
    }
    if (L > 60) {
        throw EstimatorError("L must not exceed 60, got " + std::to_string(L));
    }
    if (N < L) {
        throw EstimatorError("N must be at least L, got N = " + std::to_string(N));
    }
    if (P < 1) {
        throw EstimatorError("P must be positive");
    }
    if (!(span > 0.0 && span <= 1.0)) {
        throw EstimatorError("span must lie in (0, 1]");
    }
}

std::vector<Interval> uniform_partition(unsigned P) {
    if (P == 0) {
        throw EstimatorError("partition needs at least one interval");
    }
    std::vector<Interval> intervals(P);
    for (unsigned p = 0; p < P; ++p) {
        intervals[p] = {static_cast<double>(p) / P, static_cast<double>(p + 1) / P};
    }
    return intervals;
}

GridPathSource::GridPathSource(std::span<const double> grid_values) : values_(grid_values.begin(), grid_values.end()) {
    const std::size_t cells = values_.empty() ? 0 : values_.size() - 1;
    if (cells == 0 || (cells & (cells - 1)) != 0) {
        throw EstimatorError("grid path must have 2^n + 1 samples, got " + std::to_string(values_.size()));
    }
}

std::vector<double> GridPathSource::samples(std::uint64_t resolution) const {
    const std::uint64_t cells = values_.size() - 1;
    if (resolution == 0 || resolution > cells || cells % resolution != 0) {
        throw EstimatorError("resolution " + std::to_string(resolution) + " does not divide the path grid of " +
                             std::to_string(cells) + " cells");
    }
    const std::uint64_t stride = cells / resolution;
    std::vector<double> out(resolution + 1);
    for (std::uint64_t i = 0; i <= resolution; ++i) {
        out[i] = values_[i * stride];
    }
    return out;
}

SeriesPathSource::SeriesPathSource(HurstFamily family, unsigned J, std::uint64_t seed, unsigned workers)
    : family_(std::move(family)), J_(J), seed_(seed), workers_(workers) {}

std::vector<double> SeriesPathSource::samples(std::uint64_t resolution) const {
    if (resolution == 0) {
        throw EstimatorError("resolution must be positive");
    }
    // dyadic resolutions go through the grid engine so values match simulate_path
    if (resolution >= 2 && std::has_single_bit(resolution)) {
        SimConfig config;
        config.J = J_;
        config.n = static_cast<unsigned>(std::countr_zero(resolution));
        config.seed = seed_;
        std::vector<std::uint64_t> idx(resolution + 1);
        std::iota(idx.begin(), idx.end(), std::uint64_t{0});
        return sample_grid_points(family_, config, idx, std::span<const std::uint64_t>(&seed_, 1), workers_).front();
    }
    std::vector<double> times(resolution + 1);
    for (std::uint64_t i = 0; i <= resolution; ++i) {
        times[i] = static_cast<double>(i) / static_cast<double>(resolution);
    }
    return sample_points(family_, J_, times, std::span<const std::uint64_t>(&seed_, 1), workers_).front();
}

std::vector<std::int64_t> increment_filter_exact(unsigned L) {
    if (L < 2) {
        throw EstimatorError("filter order L must be at least 2");
    }
    std::vector<std::int64_t> binom(L + 1, 0);
    binom[0] = 1;
    for (unsigned row = 1; row <= L; ++row) {
        for (unsigned l = row; l > 0; --l) {
            binom[l] += binom[l - 1];
        }
    }
    std::vector<std::int64_t> a(L + 1);
    for (unsigned l = 0; l <= L; ++l) {
        a[l] = ((L - l) % 2 == 0 ? 1 : -1) * binom[l];
    }
    return a;
}

std::vector<double> increment_filter(unsigned L) {
    const auto exact = increment_filter_exact(L);
    return {exact.begin(), exact.end()};
}

std::vector<double> generalized_increments(std::span<const double> samples, unsigned L) {
    if (samples.size() < static_cast<std::size_t>(L) + 1) {
        throw EstimatorError("need at least L + 1 samples for generalized increments");
    }
    const auto a = increment_filter(L);
    const std::size_t count = samples.size() - L;
    std::vector<double> d(count);
    for (std::size_t k = 0; k < count; ++k) {
        double sum = 0.0;
        for (unsigned l = 0; l <= L; ++l) {
            sum += a[l] * samples[k + l];
        }
        d[k] = sum;
    }
    return d;
}

IndexRange variation_support(std::uint64_t N, unsigned L, const Interval& interval) {
    if (N < L) {
        return {};
    }
    const std::uint64_t k_max = N - L;
    const double n = static_cast<double>(N);
    // k / N is compared as a correctly rounded quotient, so a rational
    // endpoint p / P matches k / N exactly when they are equal.
    auto ratio = [n](std::uint64_t k) { return static_cast<double>(k) / n; };

    const double lo_guess = std::floor(std::max(interval.lo, 0.0) * n);
    std::uint64_t first = static_cast<std::uint64_t>(std::min(lo_guess, static_cast<double>(k_max) + 1.0));
    while (first > 0 && ratio(first - 1) >= interval.lo) {
        --first;
    }
    while (first <= k_max && ratio(first) < interval.lo) {
        ++first;
    }

    const double hi_guess = std::floor(std::max(interval.hi, 0.0) * n);
    std::uint64_t last = static_cast<std::uint64_t>(std::min(hi_guess, static_cast<double>(k_max)));
    while (last < k_max && ratio(last + 1) <= interval.hi) {
        ++last;
    }
    while (last > 0 && ratio(last) > interval.hi) {
        --last;
    }
    if (first > k_max || ratio(last) > interval.hi || last < first) {
        return {first, 0};
    }
    return {first, last - first + 1};
}

double quadratic_variation(std::span<const double> increments, std::uint64_t N, unsigned L, const Interval& interval) {
    const auto support = variation_support(N, L, interval);
    if (support.count == 0) {
        throw EstimatorError("no increments at resolution " + std::to_string(N) + " fall in [" +
                             std::to_string(interval.lo) + ", " + std::to_string(interval.hi) +
                             "]; N is too small for the partition");
    }
    if (support.first + support.count > increments.size()) {
        throw EstimatorError("increment list shorter than N - L + 1");
    }
    double sum = 0.0;
    for (std::uint64_t k = support.first; k < support.first + support.count; ++k) {
        sum += increments[k] * increments[k];
    }
    return sum / static_cast<double>(support.count);
}

double hurst_from_variations(double coarse, double fine, unsigned Q, bool* degenerate) {
    if (degenerate != nullptr) {
        *degenerate = false;
    }
    if (fine == 0.0) {
        if (coarse == 0.0) {
            if (degenerate != nullptr) {
                *degenerate = true;
            }
            return 0.0;
        }
        return 1.0;
    }
    const double ratio = coarse / fine;
    if (!(ratio > 0.0)) {
        return 0.0;
    }
    const double h = std::log(ratio) / (2.0 * std::log(static_cast<double>(Q)));
    return std::clamp(h, 0.0, 1.0);
}

EstimateSeries estimate_hurst(const PathSource& source, const EstimatorConfig& config,
                              std::span<const Interval> intervals) {
    config.validate();
    if (intervals.empty()) {
        throw EstimatorError("no intervals to estimate on");
    }
    const std::uint64_t coarse_n = config.N;
    const std::uint64_t fine_n = config.N * config.Q;
    const auto coarse = generalized_increments(source.samples(coarse_n), config.L);
    const auto fine = generalized_increments(source.samples(fine_n), config.L);

    EstimateSeries series;
    series.config = config;
    series.interval_mids.reserve(intervals.size());
    series.h_raw.reserve(intervals.size());
    for (std::size_t p = 0; p < intervals.size(); ++p) {
        const auto& interval = intervals[p];
        const double v_coarse = quadratic_variation(coarse, coarse_n, config.L, interval);
        const double v_fine = quadratic_variation(fine, fine_n, config.L, interval);
        bool degenerate = false;
        series.h_raw.push_back(hurst_from_variations(v_coarse, v_fine, config.Q, &degenerate));
        if (degenerate) {
            series.degenerate.push_back(p);
        }
        series.interval_mids.push_back(0.5 * (interval.lo + interval.hi));
    }
    const auto count = static_cast<double>(intervals.size());
    if (intervals.size() >= 3 && config.span * count >= 2.0) {
        series.h_smooth = loess_smooth(series.interval_mids, series.h_raw, config.span);
    } else {
        series.h_smooth = series.h_raw;
    }
    return series;
}

EstimateSeries estimate_hurst(const PathSource& source, const EstimatorConfig& config) {
    const auto intervals = uniform_partition(config.P);
    return estimate_hurst(source, config, intervals);
}

std::uint64_t default_resolution(unsigned n, unsigned Q) {
    const std::uint64_t cells = std::uint64_t{1} << n;
    if (Q == 0 || cells % Q != 0) {
        throw EstimatorError("Q = " + std::to_string(Q) + " does not divide the grid size 2^" + std::to_string(n) +
                             "; pass N explicitly");
    }
    return cells / Q;
}

}  // namespace ghbmp
