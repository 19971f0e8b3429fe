#include "ghbmp/experiment.hpp"

#include "ghbmp/io.hpp"
#include "ghbmp/loess.hpp"
#include "ghbmp/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace ghbmp {

namespace {

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T result{};
    const auto text = trim(value);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), result);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(key, "'" + value + "' is not a valid number");
    }
    return result;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto text = trim(value);
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError(key, "'" + value + "' is not a boolean");
}

std::string canonical_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

const std::map<std::string, std::set<std::string>>& section_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"family", {"family"}},
        {"simulator", {"J", "n", "seed", "tail-tol"}},
        {"estimator", {"N", "Q", "L", "P", "span"}},
        {"experiment", {"reps", "out", "svg", "workers", "paper-scale", "levels"}},
    };
    return keys;
}

std::string filename_index(std::size_t r) {
    return "_r" + std::to_string(r);
}

std::filesystem::path ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw io::IoError("cannot create output directory '" + dir.string() + "'");
    }
    return dir;
}

void write_stats_row(std::ostream& out, const DiffStats& s) {
    out << s.J << ',' << s.n << ',' << io::format_real(s.avg_abs) << ',' << io::format_real(s.max_abs) << ','
        << io::format_real(s.mse) << '\n';
}

void write_five(std::ostream& out, const FiveNumber& f) {
    out << io::format_real(f.min) << ',' << io::format_real(f.q1) << ',' << io::format_real(f.median) << ','
        << io::format_real(f.q3) << ',' << io::format_real(f.max);
}

std::vector<double> abs_differences(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = std::abs(a[i] - b[i]);
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate_simulation() const {
    try {
        (void)parse_family(family);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("family", e.what());
    }
    if (J > 30) {
        throw ConfigError("J", "must lie in [0, 30], got " + std::to_string(J));
    }
    if (n < 1 || n > 30) {
        throw ConfigError("n", "must lie in [1, 30], got " + std::to_string(n));
    }
    if (!(tail_tol >= 0.0) || !std::isfinite(tail_tol)) {
        throw ConfigError("tail-tol", "must be a finite non-negative number");
    }
    if (Q < 2) {
        throw ConfigError("Q", "must be at least 2");
    }
    if (L < 2 || L > 60) {
        throw ConfigError("L", "must lie in [2, 60]");
    }
    if (P < 1) {
        throw ConfigError("P", "must be positive");
    }
    if (!(span > 0.0 && span <= 1.0)) {
        throw ConfigError("span", "must lie in (0, 1]");
    }
    if (reps < 1) {
        throw ConfigError("reps", "must be at least 1");
    }
    if (workers < 1) {
        throw ConfigError("workers", "must be at least 1");
    }
    for (const auto& [level, grid] : levels) {
        if (grid < 1 || grid > 30 || level > 30) {
            throw ConfigError("levels", "(" + std::to_string(level) + "," + std::to_string(grid) + ") out of range");
        }
        if (grid > level) {
            throw ConfigError("levels", "row (" + std::to_string(level) + "," + std::to_string(grid) +
                                            ") needs n <= J");
        }
    }
}

void ExperimentConfig::validate() const {
    validate_simulation();
    if (N && *N < L) {
        throw ConfigError("N", "must be at least L");
    }
    if (!N && ((std::uint64_t{1} << n) % Q != 0)) {
        throw ConfigError("N", "Q = " + std::to_string(Q) + " does not divide 2^n; set N explicitly");
    }
    const std::uint64_t resolution = N ? *N : (std::uint64_t{1} << n) / Q;
    if (resolution < L) {
        throw ConfigError("n", "grid too coarse: N = " + std::to_string(resolution) + " is below L");
    }
    for (const auto& interval : uniform_partition(P)) {
        if (variation_support(resolution, L, interval).count == 0) {
            throw ConfigError("P", std::to_string(P) + " intervals leave some interval without increments at N = " +
                                       std::to_string(resolution));
        }
    }
}

SimConfig ExperimentConfig::sim_config() const {
    SimConfig config;
    config.J = J;
    config.n = n;
    config.seed = seed;
    config.tail_tol = tail_tol;
    return config;
}

EstimatorConfig ExperimentConfig::estimator_config(unsigned grid_n) const {
    EstimatorConfig config;
    config.N = N ? *N : default_resolution(grid_n, Q);
    config.Q = Q;
    config.L = L;
    config.P = P;
    config.span = span;
    return config;
}

std::vector<LevelPair> desk_table_levels() {
    return {{12, 9}, {13, 10}, {14, 10}};
}

std::vector<LevelPair> paper_table_levels() {
    return {{14, 10}, {15, 11}, {16, 12}, {17, 13}, {18, 14}, {19, 15}};
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("config", "cannot open '" + file.string() + "'");
    }
    std::map<std::string, std::string> settings;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = file.string() + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config", where + ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!section_keys().contains(section)) {
                throw ConfigError("config", where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config", where + ": expected 'key = value'");
        }
        const std::string key = canonical_key(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        bool known = false;
        for (const auto& [name, keys] : section_keys()) {
            if (keys.contains(key)) {
                known = true;
                if (!section.empty() && name != section) {
                    throw ConfigError(key, where + ": key belongs in section [" + name + "], not [" + section + "]");
                }
            }
        }
        if (!known) {
            throw ConfigError(key, where + ": unknown key");
        }
        settings[key] = value;
    }
    return settings;
}

std::vector<LevelPair> parse_levels(const std::string& text) {
    std::vector<LevelPair> levels;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("levels", "'" + item + "' is not of the form J:n");
        }
        levels.emplace_back(parse_number<unsigned>("levels", item.substr(0, colon)),
                            parse_number<unsigned>("levels", item.substr(colon + 1)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    if (levels.empty()) {
        throw ConfigError("levels", "empty list");
    }
    return levels;
}

void apply_setting(ExperimentConfig& config, const std::string& raw_key, const std::string& value) {
    const std::string key = canonical_key(raw_key);
    if (key == "family") {
        config.family = trim(value);
    } else if (key == "J") {
        config.J = parse_number<unsigned>(key, value);
    } else if (key == "n") {
        config.n = parse_number<unsigned>(key, value);
    } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "tail-tol") {
        config.tail_tol = parse_number<double>(key, value);
    } else if (key == "N") {
        config.N = parse_number<std::uint64_t>(key, value);
    } else if (key == "Q") {
        config.Q = parse_number<unsigned>(key, value);
    } else if (key == "L") {
        config.L = parse_number<unsigned>(key, value);
    } else if (key == "P") {
        config.P = parse_number<unsigned>(key, value);
    } else if (key == "span") {
        config.span = parse_number<double>(key, value);
    } else if (key == "reps") {
        config.reps = parse_number<unsigned>(key, value);
    } else if (key == "out") {
        config.out = trim(value);
    } else if (key == "svg") {
        config.svg = parse_bool(key, value);
    } else if (key == "workers") {
        config.workers = parse_number<unsigned>(key, value);
    } else if (key == "paper-scale") {
        config.paper_scale = parse_bool(key, value);
    } else if (key == "levels") {
        config.levels = parse_levels(value);
    } else {
        throw ConfigError(key, "unknown setting");
    }
}

DiffStats diff_stats(std::span<const double> h_true, std::span<const double> h_est, unsigned J, unsigned n) {
    if (h_true.size() != h_est.size()) {
        throw std::invalid_argument("diff_stats: curves differ in length (" + std::to_string(h_true.size()) + " vs " +
                                    std::to_string(h_est.size()) + ")");
    }
    if (h_true.empty()) {
        throw std::invalid_argument("diff_stats: empty curves");
    }
    DiffStats stats{.J = J, .n = n};
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < h_true.size(); ++i) {
        const double d = std::abs(h_true[i] - h_est[i]);
        sum += d;
        sum_sq += d * d;
        stats.max_abs = std::max(stats.max_abs, d);
    }
    const auto count = static_cast<double>(h_true.size());
    stats.avg_abs = sum / count;
    stats.mse = sum_sq / count;
    return stats;
}

FiveNumber five_number_summary(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("five_number_summary: no values");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    };
    return {sorted.front(), quantile(0.25), quantile(0.5), quantile(0.75), sorted.back()};
}

std::vector<double> true_curve(const HurstFamily& family, std::span<const double> mids, unsigned J) {
    std::vector<double> out;
    out.reserve(mids.size());
    for (double t : mids) {
        out.push_back(target_hurst(family, t, J));
    }
    return out;
}

EstimateSeries average_estimates(std::span<const EstimateSeries> replications) {
    if (replications.empty()) {
        throw std::invalid_argument("average_estimates: no replications");
    }
    EstimateSeries averaged = replications.front();
    averaged.degenerate.clear();
    if (replications.size() == 1) {
        return averaged;
    }
    for (std::size_t p = 0; p < averaged.h_raw.size(); ++p) {
        double sum = 0.0;
        for (const auto& rep : replications) {
            sum += rep.h_raw[p];
        }
        averaged.h_raw[p] = sum / static_cast<double>(replications.size());
    }
    const auto count = static_cast<double>(averaged.h_raw.size());
    if (averaged.h_raw.size() >= 3 && averaged.config.span * count >= 2.0) {
        averaged.h_smooth = loess_smooth(averaged.interval_mids, averaged.h_raw, averaged.config.span);
    } else {
        averaged.h_smooth = averaged.h_raw;
    }
    return averaged;
}

ReplicationSet run_replications(const HurstFamily& family, const ExperimentConfig& config, unsigned J, unsigned n) {
    SimConfig sim = config.sim_config();
    sim.J = J;
    sim.n = n;
    std::vector<std::uint64_t> seeds(config.reps);
    for (unsigned r = 0; r < config.reps; ++r) {
        seeds[r] = config.seed + r;
    }
    ReplicationSet set;
    set.paths = simulate_paths(family, sim, seeds, config.workers);

    const EstimatorConfig estimator = config.estimator_config(n);
    const std::uint64_t cells = std::uint64_t{1} << n;
    const std::uint64_t fine = estimator.N * estimator.Q;
    const bool on_grid = fine <= cells && cells % fine == 0 && cells % estimator.N == 0;
    const auto intervals = uniform_partition(estimator.P);
    set.estimates.resize(set.paths.size());
    parallel_for(set.paths.size(), config.workers, [&](std::size_t r) {
        if (on_grid) {
            const GridPathSource source(set.paths[r].values);
            set.estimates[r] = estimate_hurst(source, estimator, intervals);
        } else {
            const SeriesPathSource source(family, J, seeds[r]);
            set.estimates[r] = estimate_hurst(source, estimator, intervals);
        }
    });
    return set;
}

CaseResult run_case(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    const HurstFamily family = parse_family(config.family);
    const auto dir = ensure_directory(config.out);
    if (!satisfies_regularity_condition(family, config.J)) {
        log << "warning: H(t) < h_lo + 1/2 fails somewhere for family " << family.describe()
            << "; the simulation still runs\n";
    }

    CaseResult result;
    result.replications = run_replications(family, config, config.J, config.n);
    const auto& reps = result.replications;
    result.averaged = average_estimates(reps.estimates);
    if (family.has_limit()) {
        result.h_true = true_curve(family, result.averaged.interval_mids, config.J);
    }

    for (std::size_t r = 0; r < reps.paths.size(); ++r) {
        const auto csv = dir / ("path" + filename_index(r) + ".csv");
        io::write_path_csv(csv, reps.paths[r]);
        io::write_path_meta(csv, reps.paths[r]);
        result.files.push_back(csv);
        result.files.push_back(io::meta_path_for(csv));
        if (reps.paths.size() > 1) {
            const auto est = dir / ("estimate" + filename_index(r) + ".csv");
            io::write_estimate_csv(est, reps.estimates[r], result.h_true);
            result.files.push_back(est);
        }
        const auto& estimate = reps.estimates[r];
        double mean = 0.0;
        for (double h : estimate.h_raw) {
            mean += h;
        }
        mean /= static_cast<double>(estimate.h_raw.size());
        log << "replication " << r << " seed " << reps.paths[r].config.seed << ": mean h_raw "
            << io::format_real(mean);
        if (result.h_true) {
            const auto stats = diff_stats(*result.h_true, estimate.h_raw, config.J, config.n);
            log << ", avg_abs_diff " << io::format_real(stats.avg_abs) << ", max_abs_diff "
                << io::format_real(stats.max_abs);
        }
        if (!estimate.degenerate.empty()) {
            log << ", " << estimate.degenerate.size() << " flat intervals set to 0";
        }
        log << '\n';
    }
    const auto estimate_file = dir / "estimate.csv";
    io::write_estimate_csv(estimate_file, result.averaged, result.h_true);
    result.files.push_back(estimate_file);

    if (config.svg) {
        const auto& path = reps.paths.front();
        const auto path_svg = dir / "path.svg";
        io::write_line_plot(path_svg, "Realization (" + family.describe() + ", J=" + std::to_string(config.J) + ")",
                            "t", "X(t)", {{"X_J", "#1f4e9c", path.times, path.values}});
        result.files.push_back(path_svg);

        std::vector<io::Series> curves;
        if (result.h_true) {
            curves.push_back({"true H", "#1f4e9c", result.averaged.interval_mids, *result.h_true});
        }
        curves.push_back({"estimate", "#c0392b", result.averaged.interval_mids, result.averaged.h_raw});
        curves.push_back({"smoothed", "#27ae60", result.averaged.interval_mids, result.averaged.h_smooth});
        const auto hurst_svg = dir / "hurst.svg";
        io::write_line_plot(hurst_svg, "Hurst function (" + family.describe() + ")", "t", "H(t)", curves);
        result.files.push_back(hurst_svg);
    }
    return result;
}

std::vector<TableRow> replicate_table(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    const HurstFamily family = parse_family(config.family);
    if (!family.has_limit()) {
        throw ConfigError("family", "table needs a family with a known Hurst function");
    }
    const auto dir = ensure_directory(config.out);
    const auto rows = !config.levels.empty() ? config.levels
                      : config.paper_scale   ? paper_table_levels()
                                             : desk_table_levels();

    std::vector<TableRow> table;
    for (const auto& [J, n] : rows) {
        ExperimentConfig row_config = config;
        row_config.J = J;
        row_config.n = n;
        row_config.validate();
        const auto set = run_replications(family, row_config, J, n);
        const auto averaged = average_estimates(set.estimates);
        const auto h_true = true_curve(family, averaged.interval_mids, J);

        TableRow row;
        for (const auto& estimate : set.estimates) {
            row.per_replication.push_back(diff_stats(h_true, estimate.h_raw, J, n));
            row.per_replication_abs.push_back(five_number_summary(abs_differences(h_true, estimate.h_raw)));
        }
        row.averaged = diff_stats(h_true, averaged.h_raw, J, n);
        row.averaged_abs = five_number_summary(abs_differences(h_true, averaged.h_raw));
        log << "J=" << J << " n=" << n << " reps=" << set.estimates.size() << ": avg_abs_diff "
            << io::format_real(row.averaged.avg_abs) << ", max_abs_diff " << io::format_real(row.averaged.max_abs)
            << ", mse " << io::format_real(row.averaged.mse) << '\n';
        table.push_back(std::move(row));
    }

    {
        std::ofstream stats(dir / "stats.csv", std::ios::binary | std::ios::trunc);
        std::ofstream box(dir / "boxplot.csv", std::ios::binary | std::ios::trunc);
        std::ofstream avg_box(dir / "averaged_boxplot.csv", std::ios::binary | std::ios::trunc);
        if (!stats || !box || !avg_box) {
            throw io::IoError("cannot write table outputs into '" + dir.string() + "'");
        }
        stats << "J,n,avg_abs_diff,max_abs_diff,mse\n";
        box << "J,n,replication,seed,min,q1,median,q3,max,avg_abs_diff,max_abs_diff,mse\n";
        avg_box << "J,n,min,q1,median,q3,max\n";
        for (const auto& row : table) {
            write_stats_row(stats, row.averaged);
            for (std::size_t r = 0; r < row.per_replication.size(); ++r) {
                const auto& s = row.per_replication[r];
                box << s.J << ',' << s.n << ',' << r << ',' << config.seed + r << ',';
                write_five(box, row.per_replication_abs[r]);
                box << ',' << io::format_real(s.avg_abs) << ',' << io::format_real(s.max_abs) << ','
                    << io::format_real(s.mse) << '\n';
            }
            avg_box << row.averaged.J << ',' << row.averaged.n << ',';
            write_five(avg_box, row.averaged_abs);
            avg_box << '\n';
        }
        if (!stats.flush() || !box.flush() || !avg_box.flush()) {
            throw io::IoError("failed while writing table outputs into '" + dir.string() + "'");
        }
    }
    if (config.svg) {
        io::Series avg{"average", "#1f4e9c", {}, {}};
        io::Series max{"maximum", "#c0392b", {}, {}};
        io::Series mse{"mean squared", "#27ae60", {}, {}};
        for (const auto& row : table) {
            const auto J = static_cast<double>(row.averaged.J);
            avg.xs.push_back(J);
            avg.ys.push_back(row.averaged.avg_abs);
            max.xs.push_back(J);
            max.ys.push_back(row.averaged.max_abs);
            mse.xs.push_back(J);
            mse.ys.push_back(row.averaged.mse);
        }
        io::write_line_plot(dir / "stats.svg", "Differences from " + family.describe(), "J", "difference",
                            {avg, max, mse});
    }
    return table;
}

}  // namespace ghbmp
