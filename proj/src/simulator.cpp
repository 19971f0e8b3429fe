#include "ghbmp/simulator.hpp"

#include "ghbmp/noise.hpp"
#include "ghbmp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ghbmp {

namespace {

constexpr unsigned kMaxLevel = 30;
constexpr std::size_t kMaxCachedValues = 8;
constexpr double kTableBudgetDoubles = 32.0 * 1024 * 1024;  // 256 MiB
constexpr double kNoiseBudgetDoubles = 8.0 * 1024 * 1024;   // 64 MiB per batch
constexpr std::size_t kMaxBatch = 16;

/// Kahan accumulation, used for the per-level sums.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) noexcept {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    [[nodiscard]] double value() const noexcept { return sum - carry; }
};

double level_scale(unsigned level, double hurst) noexcept {
    return std::exp2(-static_cast<double>(level) * hurst);
}

// Sorted, de-duplicated evaluation points plus the map back to the caller's
// ordering.
struct PointSet {
    std::vector<double> times;
    std::vector<std::uint64_t> grid_index;  // empty unless on the dyadic grid
    int grid_exponent = -1;
    std::vector<std::size_t> original_to_sorted;
};

struct LevelPlan {
    std::vector<double> scale;         // 2^(-j H_jk)
    std::vector<double> hurst;         // H_jk
    // Kernel memoization on dyadic grids. tables[slot * residues + r][p]
    // holds kernel(distinct[slot], x) at every grid-reachable x.
    std::vector<std::uint8_t> slot;
    std::vector<std::vector<double>> tables;
    std::uint64_t residues = 1;
    bool cached = false;
};

struct Plan {
    const HurstFamily* family = nullptr;
    unsigned J = 0;
    PointSet points;
    double x_cut = std::numeric_limits<double>::infinity();
    std::vector<LevelPlan> levels;
};

double cutoff_argument(const HurstFamily& family, double tail_tol) {
    if (tail_tol <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    // c (3 + x)^(h_hi - 3/2) < tail_tol  <=>  x > x_cut
    return std::pow(tail_tol / kEnvelopeConstant, 1.0 / (family.h_hi() - 1.5)) - 3.0;
}

double estimated_updates(const PointSet& points, unsigned J) {
    const double per_unit_t = std::ldexp(1.0, static_cast<int>(J) + 1) - 1.0;
    double total = 0.0;
    for (double t : points.times) {
        total += per_unit_t * t + (J + 1);
    }
    return total;
}

void build_level_tables(LevelPlan& level, unsigned j, unsigned n, std::uint64_t max_index) {
    std::vector<double> distinct = level.hurst;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    level.slot.resize(level.hurst.size());
    for (std::size_t k = 0; k < level.hurst.size(); ++k) {
        level.slot[k] = static_cast<std::uint8_t>(
            std::lower_bound(distinct.begin(), distinct.end(), level.hurst[k]) - distinct.begin());
    }
    level.residues = j > n ? (std::uint64_t{1} << (j - n)) : 1;
    const std::size_t length = static_cast<std::size_t>(max_index) + 1;
    level.tables.assign(distinct.size() * level.residues, std::vector<double>(length, 0.0));
    const int shift = static_cast<int>(n) - static_cast<int>(j);
    for (std::size_t s = 0; s < distinct.size(); ++s) {
        for (std::uint64_t r = 0; r < level.residues; ++r) {
            auto& table = level.tables[s * level.residues + r];
            for (std::size_t p = 1; p < length; ++p) {
                // j <= n: x = p / 2^(n-j);  j > n: x = p 2^(j-n) - r
                const double x = shift >= 0 ? std::ldexp(static_cast<double>(p), -shift)
                                            : std::ldexp(static_cast<double>(p), -shift) - static_cast<double>(r);
                table[p] = kernel_unchecked(distinct[s], x);
            }
        }
    }
    level.cached = true;
}

Plan make_plan(const HurstFamily& family, unsigned J, PointSet points, double tail_tol, double seeds,
               double max_updates) {
    if (J > kMaxLevel) {
        throw PlanningError("truncation level J = " + std::to_string(J) + " exceeds " + std::to_string(kMaxLevel));
    }
    if (!(tail_tol >= 0.0)) {
        throw PlanningError("tail tolerance must be non-negative");
    }
    const double updates = estimated_updates(points, J) * seeds;
    if (updates > max_updates) {
        std::ostringstream msg;
        msg << "request needs about " << updates << " kernel-term updates, above the budget of " << max_updates;
        throw PlanningError(msg.str());
    }

    Plan plan;
    plan.family = &family;
    plan.J = J;
    plan.points = std::move(points);
    plan.x_cut = cutoff_argument(family, tail_tol);
    plan.levels.resize(J + 1);

    const bool dyadic = plan.points.grid_exponent >= 0 && !std::isfinite(plan.x_cut);
    const auto n = static_cast<unsigned>(std::max(plan.points.grid_exponent, 0));
    const std::uint64_t max_index = plan.points.grid_index.empty() ? 0 : plan.points.grid_index.back();
    double table_doubles = 0.0;

    for (unsigned j = 0; j <= J; ++j) {
        auto& level = plan.levels[j];
        const std::uint64_t count = std::uint64_t{1} << j;
        level.hurst.resize(count);
        level.scale.resize(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            const double h = h_jk(family, HaarIndex{j, static_cast<std::int64_t>(k)});
            level.hurst[k] = h;
            level.scale[k] = level_scale(j, h);
        }
        if (!dyadic) {
            continue;
        }
        std::vector<double> sorted = level.hurst;
        std::sort(sorted.begin(), sorted.end());
        const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
        const double residues = j > n ? std::ldexp(1.0, static_cast<int>(j - n)) : 1.0;
        const double table_cost = static_cast<double>(distinct) * residues * static_cast<double>(max_index + 1);
        double direct_cost = 0.0;
        for (double t : plan.points.times) {
            direct_cost += std::ceil(std::ldexp(t, static_cast<int>(j)));
        }
        if (distinct <= kMaxCachedValues && table_cost <= direct_cost &&
            table_doubles + table_cost <= kTableBudgetDoubles) {
            table_doubles += table_cost;
            build_level_tables(level, j, n, max_index);
        }
    }
    return plan;
}

PointSet dyadic_points(unsigned n, std::span<const std::uint64_t> indices) {
    const std::uint64_t last = std::uint64_t{1} << n;
    PointSet points;
    points.grid_exponent = static_cast<int>(n);
    std::vector<std::uint64_t> sorted(indices.begin(), indices.end());
    for (auto i : sorted) {
        if (i > last) {
            throw PlanningError("grid index " + std::to_string(i) + " outside [0, 2^" + std::to_string(n) + "]");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    points.grid_index = sorted;
    points.times.reserve(sorted.size());
    for (auto i : sorted) {
        points.times.push_back(std::ldexp(static_cast<double>(i), -static_cast<int>(n)));
    }
    points.original_to_sorted.reserve(indices.size());
    for (auto i : indices) {
        points.original_to_sorted.push_back(
            static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), i) - sorted.begin()));
    }
    return points;
}

PointSet arbitrary_points(std::span<const double> times) {
    PointSet points;
    std::vector<double> sorted(times.begin(), times.end());
    for (double t : sorted) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw PlanningError("evaluation time " + std::to_string(t) + " outside [0, 1]");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    points.times = sorted;
    for (double t : times) {
        points.original_to_sorted.push_back(
            static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin()));
    }
    return points;
}

// Accumulates X_J at points [first, last) of the plan for a batch of
// realizations. noise[(2^j - 1 + k) * batch + b] is eps_jk for seed b.
void synthesize_chunk(const Plan& plan, std::span<const double> noise, std::size_t batch, std::size_t first,
                      std::size_t last, std::span<double> out) {
    const auto& times = plan.points.times;
    const std::size_t width = last - first;
    std::vector<double> level_sum(width * batch);
    std::vector<double> carry(width * batch);
    std::vector<double> column(width);
    std::fill(out.begin(), out.end(), 0.0);
    const int n = plan.points.grid_exponent;

    for (unsigned j = 0; j <= plan.J; ++j) {
        const auto& level = plan.levels[j];
        std::fill(level_sum.begin(), level_sum.end(), 0.0);
        std::fill(carry.begin(), carry.end(), 0.0);
        const int jj = static_cast<int>(j);
        const std::uint64_t count = std::uint64_t{1} << j;
        const std::size_t noise_offset = static_cast<std::size_t>(count - 1) * batch;
        std::size_t lo = first;
        std::size_t hi = first;
        for (std::uint64_t k = 0; k < count; ++k) {
            const double kd = static_cast<double>(k);
            while (lo < last && std::ldexp(times[lo], jj) <= kd) {
                ++lo;
            }
            if (lo == last) {
                break;
            }
            while (hi < last && std::ldexp(times[hi], jj) - kd <= plan.x_cut) {
                ++hi;
            }
            if (hi <= lo) {
                continue;
            }
            const double scale = level.scale[k];
            if (level.cached) {
                const auto& grid_index = plan.points.grid_index;
                if (static_cast<int>(j) <= n) {
                    const auto& table = level.tables[level.slot[k]];
                    const std::uint64_t origin = k << (n - jj);
                    for (std::size_t p = lo; p < hi; ++p) {
                        column[p - lo] = scale * table[grid_index[p] - origin];
                    }
                } else {
                    const unsigned shift = j - static_cast<unsigned>(n);
                    const std::uint64_t q = k >> shift;
                    const std::uint64_t r = k & (level.residues - 1);
                    const auto& table = level.tables[level.slot[k] * level.residues + r];
                    for (std::size_t p = lo; p < hi; ++p) {
                        column[p - lo] = scale * table[grid_index[p] - q];
                    }
                }
            } else {
                const double h = level.hurst[k];
                for (std::size_t p = lo; p < hi; ++p) {
                    column[p - lo] = scale * kernel_unchecked(h, std::ldexp(times[p], jj) - kd);
                }
            }
            const double* eps = noise.data() + noise_offset + static_cast<std::size_t>(k) * batch;
            for (std::size_t p = lo; p < hi; ++p) {
                const double c = column[p - lo];
                double* sum = level_sum.data() + (p - first) * batch;
                double* lost = carry.data() + (p - first) * batch;
                for (std::size_t b = 0; b < batch; ++b) {
                    const double y = c * eps[b] - lost[b];
                    const double t = sum[b] + y;
                    lost[b] = (t - sum[b]) - y;
                    sum[b] = t;
                }
            }
        }
        for (std::size_t i = 0; i < width * batch; ++i) {
            out[i] += level_sum[i] - carry[i];
        }
    }
}

std::vector<std::vector<double>> run_plan(const Plan& plan, std::span<const std::uint64_t> seeds, unsigned workers) {
    const std::size_t points = plan.points.times.size();
    const std::size_t terms = (std::size_t{1} << (plan.J + 1)) - 1;
    const std::size_t batch_cap = std::max<std::size_t>(
        1, std::min<std::size_t>(kMaxBatch, static_cast<std::size_t>(kNoiseBudgetDoubles / static_cast<double>(terms))));
    workers = std::max(1u, workers);

    std::vector<std::vector<double>> sorted_values(seeds.size(), std::vector<double>(points, 0.0));
    const std::size_t chunk_count = workers == 1 ? 1 : std::min<std::size_t>(points, 4 * workers);
    const std::size_t chunk_size = chunk_count == 0 ? 0 : (points + chunk_count - 1) / chunk_count;

    // Batches are processed in waves of `workers` so noise memory stays bounded.
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t s = 0; s < seeds.size(); s += batch_cap) {
        batches.emplace_back(s, std::min(seeds.size(), s + batch_cap));
    }
    for (std::size_t wave = 0; wave < batches.size(); wave += workers) {
        const std::size_t wave_end = std::min(batches.size(), wave + workers);
        std::vector<std::vector<double>> noise(wave_end - wave);
        parallel_for(wave_end - wave, workers, [&](std::size_t w) {
            const auto [s0, s1] = batches[wave + w];
            const std::size_t width = s1 - s0;
            auto& buffer = noise[w];
            buffer.resize(terms * width);
            for (std::size_t b = 0; b < width; ++b) {
                const NoiseStream stream(seeds[s0 + b]);
                for (unsigned j = 0; j <= plan.J; ++j) {
                    const std::uint64_t count = std::uint64_t{1} << j;
                    for (std::uint64_t k = 0; k < count; ++k) {
                        buffer[(count - 1 + k) * width + b] = stream(j, k);
                    }
                }
            }
        });
        const std::size_t tasks = (wave_end - wave) * chunk_count;
        parallel_for(tasks, workers, [&](std::size_t task) {
            const std::size_t w = task / chunk_count;
            const std::size_t chunk = task % chunk_count;
            const auto [s0, s1] = batches[wave + w];
            const std::size_t width = s1 - s0;
            const std::size_t first = chunk * chunk_size;
            const std::size_t last = std::min(points, first + chunk_size);
            if (first >= last) {
                return;
            }
            std::vector<double> out((last - first) * width);
            synthesize_chunk(plan, noise[w], width, first, last, out);
            for (std::size_t p = first; p < last; ++p) {
                for (std::size_t b = 0; b < width; ++b) {
                    sorted_values[s0 + b][p] = out[(p - first) * width + b];
                }
            }
        });
    }

    std::vector<std::vector<double>> result(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        result[s].reserve(plan.points.original_to_sorted.size());
        for (auto idx : plan.points.original_to_sorted) {
            result[s].push_back(sorted_values[s][idx]);
        }
    }
    return result;
}

template <typename Visit>
void for_each_coefficient_pair(const HurstFamily& family, double t, double t2, unsigned J, Visit&& visit) {
    for (unsigned j = 0; j <= J; ++j) {
        const int jj = static_cast<int>(j);
        const double x_lo = std::ldexp(std::min(t, t2), jj);
        const auto count = static_cast<std::int64_t>(1) << j;
        for (std::int64_t k = 0; k < count && static_cast<double>(k) < x_lo; ++k) {
            const double h = h_jk(family, HaarIndex{j, k});
            const double scale = level_scale(j, h);
            const double kd = static_cast<double>(k);
            visit(scale * kernel_unchecked(h, std::ldexp(t, jj) - kd), scale * kernel_unchecked(h, std::ldexp(t2, jj) - kd));
        }
    }
}

}  // namespace

void SimConfig::validate() const {
    if (n < 1 || n > kMaxLevel) {
        throw PlanningError("grid exponent n must lie in [1, " + std::to_string(kMaxLevel) + "], got " + std::to_string(n));
    }
    if (J > kMaxLevel) {
        throw PlanningError("truncation level J must lie in [0, " + std::to_string(kMaxLevel) + "], got " + std::to_string(J));
    }
    if (!(tail_tol >= 0.0) || !std::isfinite(tail_tol)) {
        throw PlanningError("tail_tol must be a finite non-negative number");
    }
    if (!(max_updates > 0.0)) {
        throw PlanningError("max_updates must be positive");
    }
}

std::uint64_t PathSample::config_hash() const {
    std::ostringstream canonical;
    canonical.precision(17);
    canonical << family << '|' << config.J << '|' << config.n << '|' << config.seed << '|' << config.tail_tol;
    std::uint64_t hash = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : canonical.str()) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

double coefficient(const HurstFamily& family, const HaarIndex& idx, double t) {
    const double h = h_jk(family, idx);
    const double x = std::ldexp(t, static_cast<int>(idx.level)) - static_cast<double>(idx.position);
    return level_scale(idx.level, h) * kernel_unchecked(h, x);
}

double variance(const HurstFamily& family, double t, unsigned J) {
    return covariance(family, t, t, J);
}

double covariance(const HurstFamily& family, double t, double t2, unsigned J) {
    if (!(t >= 0.0 && t <= 1.0 && t2 >= 0.0 && t2 <= 1.0)) {
        throw std::invalid_argument("covariance arguments must lie in [0, 1]");
    }
    CompensatedSum total;
    for_each_coefficient_pair(family, t, t2, J, [&](double a, double b) { total.add(a * b); });
    return total.value();
}

double dropped_variance_bound(const HurstFamily& family, unsigned J, double tail_tol) {
    const double x_cut = cutoff_argument(family, tail_tol);
    if (!std::isfinite(x_cut)) {
        return 0.0;
    }
    const double x0 = std::max(x_cut, 0.0);
    const double two_p = 2.0 * family.h_hi() - 3.0;
    // sum over x0, x0+1, ... of (3 + x)^(2p) <= f(x0) + int_x0^inf f
    const double per_level = kEnvelopeConstant * kEnvelopeConstant *
                             (std::pow(3.0 + x0, two_p) + std::pow(3.0 + x0, two_p + 1.0) / (-(two_p + 1.0)));
    double total = 0.0;
    for (unsigned j = 0; j <= J; ++j) {
        if (std::ldexp(1.0, static_cast<int>(j)) > x0) {
            total += std::exp2(-2.0 * j * family.h_lo()) * per_level;
        }
    }
    return total;
}

PathSample simulate_path(const HurstFamily& family, const SimConfig& config, unsigned workers) {
    const std::uint64_t seed = config.seed;
    auto paths = simulate_paths(family, config, std::span<const std::uint64_t>(&seed, 1), workers);
    return std::move(paths.front());
}

std::vector<PathSample> simulate_paths(const HurstFamily& family, const SimConfig& config,
                                       std::span<const std::uint64_t> seeds, unsigned workers) {
    config.validate();
    const std::uint64_t last = std::uint64_t{1} << config.n;
    std::vector<std::uint64_t> indices(last + 1);
    std::iota(indices.begin(), indices.end(), std::uint64_t{0});
    const Plan plan = make_plan(family, config.J, dyadic_points(config.n, indices), config.tail_tol,
                                static_cast<double>(seeds.size()), config.max_updates);
    auto values = run_plan(plan, seeds, workers);

    const double dropped = dropped_variance_bound(family, config.J, config.tail_tol);
    std::vector<PathSample> paths(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        auto& path = paths[s];
        path.times = plan.points.times;
        path.values = std::move(values[s]);
        path.config = config;
        path.config.seed = seeds[s];
        path.family = family.describe();
        path.dropped_variance_bound = dropped;
    }
    return paths;
}

std::vector<std::vector<double>> sample_grid_points(const HurstFamily& family, const SimConfig& config,
                                                    std::span<const std::uint64_t> grid_indices,
                                                    std::span<const std::uint64_t> seeds, unsigned workers) {
    config.validate();
    const Plan plan = make_plan(family, config.J, dyadic_points(config.n, grid_indices), config.tail_tol,
                                static_cast<double>(seeds.size()), config.max_updates);
    return run_plan(plan, seeds, workers);
}

std::vector<std::vector<double>> sample_points(const HurstFamily& family, unsigned J, std::span<const double> times,
                                               std::span<const std::uint64_t> seeds, unsigned workers) {
    const SimConfig defaults;
    const Plan plan = make_plan(family, J, arbitrary_points(times), 0.0, static_cast<double>(seeds.size()),
                                defaults.max_updates);
    return run_plan(plan, seeds, workers);
}

double second_difference(const PathSample& path, unsigned J, std::int64_t K) {
    const unsigned n = path.config.n;
    if (J + 1 > n) {
        throw std::invalid_argument("second difference at level " + std::to_string(J) +
                                    " needs grid exponent >= " + std::to_string(J + 1) + ", path has " +
                                    std::to_string(n));
    }
    if (K < 0 || K >= (std::int64_t{1} << J)) {
        throw std::invalid_argument("second difference position K out of range");
    }
    if (path.values.size() != (std::size_t{1} << n) + 1) {
        throw std::invalid_argument("path does not cover the full dyadic grid");
    }
    const auto stride = std::size_t{1} << (n - J);
    const auto left = static_cast<std::size_t>(K) * stride;
    const auto mid = left + stride / 2;
    const auto right = left + stride;
    return path.values[right] - 2.0 * path.values[mid] + path.values[left];
}

}  // namespace ghbmp
