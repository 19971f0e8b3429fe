#pragma once

#include "ghbmp/estimator.hpp"
#include "ghbmp/hurst_family.hpp"
#include "ghbmp/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ghbmp {

/// Invalid experiment configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

using LevelPair = std::pair<unsigned, unsigned>;  // (J, n)

struct ExperimentConfig {
    std::string family = "constant:0.5";
    unsigned J = 12;
    unsigned n = 10;
    std::uint64_t seed = 1;
    double tail_tol = 0.0;
    std::optional<std::uint64_t> N;  ///< defaults to 2^n / Q
    unsigned Q = 2;
    unsigned L = 2;
    unsigned P = 100;
    double span = 0.25;
    unsigned reps = 1;
    std::filesystem::path out = ".";
    bool svg = false;
    unsigned workers = 1;
    bool paper_scale = false;
    std::vector<LevelPair> levels;  ///< table rows; empty selects the defaults

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
    /// The subset of validate() that simulation alone needs.
    void validate_simulation() const;

    [[nodiscard]] SimConfig sim_config() const;
    /// Estimator settings for a path on the grid 2^grid_n.
    [[nodiscard]] EstimatorConfig estimator_config(unsigned grid_n) const;
};

/// Desk-scale table rows {(12,9),(13,10),(14,10)}.
[[nodiscard]] std::vector<LevelPair> desk_table_levels();
/// Full rows {(14,10),(15,11),...,(19,15)}.
[[nodiscard]] std::vector<LevelPair> paper_table_levels();

/// Flat `key = value` file with optional [section] headers, '#' comments.
/// Keys mirror the CLI flag names. Unknown sections or keys, or keys in the
/// wrong section, raise ConfigError.
[[nodiscard]] std::map<std::string, std::string> read_config_file(const std::filesystem::path& file);

/// Applies one key/value pair (flag name without dashes) to the config.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses "J:n,J:n,...".
[[nodiscard]] std::vector<LevelPair> parse_levels(const std::string& text);

struct DiffStats {
    unsigned J = 0;
    unsigned n = 0;
    double avg_abs = 0.0;
    double max_abs = 0.0;
    double mse = 0.0;
};

/// Mean, max and mean square of |h_true - h_est|.
[[nodiscard]] DiffStats diff_stats(std::span<const double> h_true, std::span<const double> h_est, unsigned J,
                                   unsigned n);

struct FiveNumber {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Min, quartiles (linear interpolation between order statistics) and max.
[[nodiscard]] FiveNumber five_number_summary(std::span<const double> values);

/// True curve on the interval midpoints: the family's limit where known.
[[nodiscard]] std::vector<double> true_curve(const HurstFamily& family, std::span<const double> mids, unsigned J);

/// Pointwise mean of the raw estimates; smoothed with the same span.
[[nodiscard]] EstimateSeries average_estimates(std::span<const EstimateSeries> replications);

struct ReplicationSet {
    std::vector<PathSample> paths;
    std::vector<EstimateSeries> estimates;
};

/// Simulates and estimates `reps` realizations with seeds seed, seed+1, ...
[[nodiscard]] ReplicationSet run_replications(const HurstFamily& family, const ExperimentConfig& config,
                                              unsigned J, unsigned n);

struct CaseResult {
    ReplicationSet replications;
    EstimateSeries averaged;
    std::optional<std::vector<double>> h_true;
    std::vector<std::filesystem::path> files;
};

/// End-to-end single case: paths, estimates, optional plots, one summary
/// line per replication on `log`.
CaseResult run_case(const ExperimentConfig& config, std::ostream& log);

struct TableRow {
    DiffStats averaged;                  ///< stats of the replication-averaged curve
    std::vector<DiffStats> per_replication;
    std::vector<FiveNumber> per_replication_abs;  ///< boxplot data, one per replication
    FiveNumber averaged_abs;
};

/// Difference-statistics table across (J, n) rows; writes stats.csv, boxplot.csv and
/// averaged_boxplot.csv into config.out.
std::vector<TableRow> replicate_table(const ExperimentConfig& config, std::ostream& log);

}  // namespace ghbmp
