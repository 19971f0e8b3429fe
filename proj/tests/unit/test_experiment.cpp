#include "ghbmp/experiment.hpp"

#include "ghbmp/io.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ghbmp;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ghbmp_experiment_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<double> ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        r[order[i]] = static_cast<double>(i);
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    }
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double mean_over(const EstimateSeries& s, double lo, double hi) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t p = 0; p < s.h_smooth.size(); ++p) {
        if (s.interval_mids[p] >= lo && s.interval_mids[p] <= hi) {
            sum += s.h_smooth[p];
            ++count;
        }
    }
    return sum / count;
}

std::string field_of(const ExperimentConfig& config) {
    try {
        config.validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("diff_stats examples") {
    const std::vector<double> a = {0.1, 0.5, 0.9};
    const auto same = diff_stats(a, a, 12, 10);
    CHECK(same.avg_abs == 0.0);
    CHECK(same.max_abs == 0.0);
    CHECK(same.mse == 0.0);
    CHECK(same.J == 12);
    CHECK(same.n == 10);
    const std::vector<double> b = {0.2, 0.4, 1.0};
    const auto shifted = diff_stats(a, b, 1, 1);
    CHECK(shifted.avg_abs == doctest::Approx(0.1));
    CHECK(shifted.max_abs == doctest::Approx(0.1));
    CHECK(shifted.mse == doctest::Approx(0.01));
    CHECK_THROWS_AS((void)diff_stats(a, std::vector<double>{0.1}, 1, 1), std::invalid_argument);
}

TEST_CASE("diff_stats ordering invariants") {
    gen::for_all(91, 500, [](gen::Rng& rng, int) {
        const auto P = static_cast<std::size_t>(rng.integer(1, 100));
        std::vector<double> a(P), b(P);
        for (std::size_t i = 0; i < P; ++i) {
            a[i] = rng.uniform(0.0, 1.0);
            b[i] = rng.uniform(0.0, 1.0);
        }
        const auto s = diff_stats(a, b, 0, 1);
        CHECK(s.avg_abs >= 0.0);
        CHECK(s.avg_abs <= s.max_abs * (1.0 + 1e-15));
        CHECK(s.max_abs <= 1.0);
        CHECK(s.mse <= s.max_abs * s.max_abs * (1.0 + 1e-15));
    });
}

TEST_CASE("five number summary") {
    const std::vector<double> xs = {5.0, 1.0, 3.0, 2.0, 4.0};
    const auto f = five_number_summary(xs);
    CHECK(f.min == 1.0);
    CHECK(f.q1 == 2.0);
    CHECK(f.median == 3.0);
    CHECK(f.q3 == 4.0);
    CHECK(f.max == 5.0);
    const std::vector<double> pair = {0.0, 1.0};
    CHECK(five_number_summary(pair).median == 0.5);
    CHECK_THROWS_AS((void)five_number_summary(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("config file parsing") {
    const auto dir = fresh_dir("config");
    const auto file = dir / "run.ini";
    std::ofstream(file) << "# demo\n[family]\nfamily = linear:0.2,0.45\n\n[simulator]\nJ = 14\nn=12\nseed = 9 # inline\n"
                           "tail_tol = 1e-6\n[estimator]\nP = 20\nspan = 0.3\n[experiment]\nreps = 3\nsvg = true\n"
                           "levels = 12:9, 13:10\n";
    const auto settings = read_config_file(file);
    ExperimentConfig config;
    for (const auto& [key, value] : settings) {
        apply_setting(config, key, value);
    }
    CHECK(config.family == "linear:0.2,0.45");
    CHECK(config.J == 14);
    CHECK(config.n == 12);
    CHECK(config.seed == 9);
    CHECK(config.tail_tol == 1e-6);
    CHECK(config.P == 20);
    CHECK(config.span == 0.3);
    CHECK(config.reps == 3);
    CHECK(config.svg);
    CHECK(config.levels == std::vector<LevelPair>{{12, 9}, {13, 10}});
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("config file errors name the problem") {
    const auto dir = fresh_dir("config_errors");
    const auto file = dir / "bad.ini";
    std::ofstream(file) << "[simulator]\nP = 20\n";
    CHECK_THROWS_WITH_AS((void)read_config_file(file), doctest::Contains("[estimator]"), ConfigError);
    std::ofstream(file) << "[nonsense]\n";
    CHECK_THROWS_AS((void)read_config_file(file), ConfigError);
    std::ofstream(file) << "colour = red\n";
    CHECK_THROWS_AS((void)read_config_file(file), ConfigError);
    std::ofstream(file) << "J 12\n";
    CHECK_THROWS_AS((void)read_config_file(file), ConfigError);
    CHECK_THROWS_AS((void)read_config_file(dir / "absent.ini"), ConfigError);
}

TEST_CASE("apply_setting rejects malformed values") {
    ExperimentConfig config;
    CHECK_THROWS_AS(apply_setting(config, "J", "twelve"), ConfigError);
    CHECK_THROWS_AS(apply_setting(config, "span", "0.3x"), ConfigError);
    CHECK_THROWS_AS(apply_setting(config, "svg", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_setting(config, "levels", "12-9"), ConfigError);
    CHECK_THROWS_AS(apply_setting(config, "bogus", "1"), ConfigError);
    apply_setting(config, "paper_scale", "yes");
    CHECK(config.paper_scale);
}

TEST_CASE("validation names the offending field") {
    ExperimentConfig config;
    CHECK(field_of(config).empty());
    auto with = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        return field_of(c);
    };
    CHECK(with([](ExperimentConfig& c) { c.family = "brownian"; }) == "family");
    CHECK(with([](ExperimentConfig& c) { c.n = 0; }) == "n");
    CHECK(with([](ExperimentConfig& c) { c.J = 40; }) == "J");
    CHECK(with([](ExperimentConfig& c) { c.Q = 1; }) == "Q");
    CHECK(with([](ExperimentConfig& c) { c.L = 1; }) == "L");
    CHECK(with([](ExperimentConfig& c) { c.P = 0; }) == "P");
    CHECK(with([](ExperimentConfig& c) { c.span = 1.5; }) == "span");
    CHECK(with([](ExperimentConfig& c) { c.reps = 0; }) == "reps");
    CHECK(with([](ExperimentConfig& c) { c.workers = 0; }) == "workers");
    CHECK(with([](ExperimentConfig& c) { c.tail_tol = -1.0; }) == "tail-tol");
    CHECK(with([](ExperimentConfig& c) { c.Q = 3; }) == "N");
    CHECK(with([](ExperimentConfig& c) { c.n = 4; }) == "P");
    CHECK(with([](ExperimentConfig& c) { c.levels = {{9, 12}}; }) == "levels");
}

TEST_CASE("estimator settings follow the grid") {
    ExperimentConfig config;
    CHECK(config.estimator_config(10).N == 512);
    CHECK(config.estimator_config(12).N == 2048);
    config.N = 100;
    CHECK(config.estimator_config(12).N == 100);
    CHECK(desk_table_levels().size() == 3);
    CHECK(paper_table_levels().front() == LevelPair{14, 10});
    CHECK(paper_table_levels().back() == LevelPair{19, 15});
}

TEST_CASE("run_case for constant H writes three files") {
    ExperimentConfig config;
    config.out = fresh_dir("constant");
    std::ostringstream log;
    const auto result = run_case(config, log);
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(config.out)) {
        names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"estimate.csv", "path_r0.csv", "path_r0.meta"});
    REQUIRE(result.h_true);
    for (double h : *result.h_true) {
        CHECK(h == 0.5);
    }
    CHECK(log.str().rfind("replication 0 seed 1:", 0) == 0);
    CHECK(slurp(config.out / "estimate.csv").find("\n0,0.0050000000000000001,0.5,") != std::string::npos);
}

TEST_CASE("run_case writes plots and per-replication estimates on request") {
    ExperimentConfig config;
    config.family = "sinusoidal";
    config.J = 9;
    config.n = 8;
    config.P = 20;
    config.reps = 2;
    config.svg = true;
    config.out = fresh_dir("plots");
    std::ostringstream log;
    const auto result = run_case(config, log);
    for (const char* name : {"path_r0.csv", "path_r1.csv", "path_r1.meta", "estimate_r0.csv", "estimate_r1.csv",
                             "estimate.csv", "path.svg", "hurst.svg"}) {
        CAPTURE(name);
        CHECK(std::filesystem::exists(config.out / name));
    }
    CHECK(log.str().find("warning: ") != std::string::npos);
    CHECK(log.str().find("replication 1 seed 2:") != std::string::npos);
    CHECK(result.replications.paths[1].config.seed == 2);
}

TEST_CASE("run_case rejects an unusable output directory") {
    const auto dir = fresh_dir("blocked");
    std::ofstream(dir / "file") << "x";
    ExperimentConfig config;
    config.J = 4;
    config.n = 8;
    config.P = 4;
    config.out = dir / "file" / "sub";
    std::ostringstream log;
    CHECK_THROWS_AS(run_case(config, log), io::IoError);
}

TEST_CASE("linear family: smoothed curve increases") {
    ExperimentConfig config;
    config.family = "linear";
    config.J = 14;
    config.n = 12;
    config.out = fresh_dir("linear");
    std::ostringstream log;
    const auto result = run_case(config, log);
    CHECK(spearman(result.averaged.interval_mids, result.averaged.h_smooth) > 0.5);
}

TEST_CASE("ramp family: smoothed curve steps up") {
    ExperimentConfig config;
    config.family = "ramp";
    config.J = 14;
    config.n = 12;
    config.out = fresh_dir("ramp");
    std::ostringstream log;
    const auto result = run_case(config, log);
    CHECK(mean_over(result.averaged, 0.65, 1.0) - mean_over(result.averaged, 0.0, 0.35) >= 0.3);
}

TEST_CASE("case outputs are identical at any worker count") {
    std::string reference;
    for (unsigned workers : {1u, 3u, 8u}) {
        ExperimentConfig config;
        config.family = "sinusoidal";
        config.J = 10;
        config.n = 9;
        config.reps = 5;
        config.workers = workers;
        config.out = fresh_dir("workers" + std::to_string(workers));
        std::ostringstream log;
        (void)run_case(config, log);
        std::string all;
        for (const char* name : {"path_r0.csv", "path_r4.csv", "estimate_r2.csv", "estimate.csv"}) {
            all += slurp(config.out / name);
        }
        if (reference.empty()) {
            reference = all;
        }
        CHECK(all == reference);
    }
}

TEST_CASE("single replication: averaged curve equals the replication") {
    ExperimentConfig config;
    config.family = "sinusoidal";
    config.J = 9;
    config.n = 8;
    config.P = 20;
    const auto set = run_replications(parse_family(config.family), config, 9, 8);
    const auto averaged = average_estimates(set.estimates);
    CHECK(averaged.h_raw == set.estimates[0].h_raw);
    CHECK(averaged.h_smooth == set.estimates[0].h_smooth);
}

TEST_CASE("table rows and files") {
    ExperimentConfig config;
    config.family = "sinusoidal";
    config.levels = {{8, 7}, {9, 8}};
    config.P = 20;
    config.reps = 3;
    config.out = fresh_dir("table");
    std::ostringstream log;
    const auto rows = replicate_table(config, log);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.per_replication.size() == 3);
        CHECK(row.per_replication_abs.size() == 3);
        CHECK(row.averaged.avg_abs <= row.averaged.max_abs);
        CHECK(row.averaged_abs.max == doctest::Approx(row.averaged.max_abs));
    }
    const auto stats = slurp(config.out / "stats.csv");
    CHECK(stats.rfind("J,n,avg_abs_diff,max_abs_diff,mse\n8,7,", 0) == 0);
    CHECK(slurp(config.out / "boxplot.csv").rfind("J,n,replication,seed,min,q1,median,q3,max,", 0) == 0);
    CHECK(std::filesystem::exists(config.out / "averaged_boxplot.csv"));
    CHECK(log.str().find("J=9 n=8 reps=3") != std::string::npos);

    config.family = "constant:0.4";
    config.levels = {{6, 7}};
    CHECK_THROWS_AS((void)replicate_table(config, log), ConfigError);
}

TEST_CASE("averaging replications reduces the error") {
    ExperimentConfig config;
    config.family = "sinusoidal";
    config.reps = 30;
    config.P = 100;
    const auto family = parse_family(config.family);
    const auto set = run_replications(family, config, 12, 10);
    const auto averaged = average_estimates(set.estimates);
    const auto truth = true_curve(family, averaged.interval_mids, 12);
    const double pooled = diff_stats(truth, averaged.h_raw, 12, 10).avg_abs;
    int beaten = 0;
    for (const auto& rep : set.estimates) {
        beaten += pooled <= diff_stats(truth, rep.h_raw, 12, 10).avg_abs ? 1 : 0;
    }
    CHECK(beaten >= 24);
}
