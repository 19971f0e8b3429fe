// ghbmp: simulate Haar-based multifractional paths and estimate their
// Hurst functions from the command line.

#include "ghbmp/estimator.hpp"
#include "ghbmp/experiment.hpp"
#include "ghbmp/haar_kernel.hpp"
#include "ghbmp/io.hpp"
#include "ghbmp/noise.hpp"
#include "ghbmp/quadrature_oracle.hpp"
#include "ghbmp/simulator.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace ghbmp;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::map<std::string, std::string> values;
    std::string config_file;
    bool svg = false;
    bool paper_scale = false;
    std::string input;
};

void add_common(CLI::App& app, Options& opts, std::map<std::string, CLI::Option*>& registered) {
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"family", "Hurst family: constant[:h], linear[:a,b], sinusoidal[:c,a,f], ramp"},
        {"J", "finest Haar level"},
        {"n", "grid exponent, samples at i / 2^n"},
        {"seed", "base seed; replication r uses seed + r"},
        {"tail-tol", "drop far-field terms below this relative envelope (0 keeps all)"},
        {"N", "coarse estimator resolution (default 2^n / Q)"},
        {"Q", "resolution ratio"},
        {"L", "increment filter order"},
        {"P", "number of subintervals"},
        {"span", "LOESS span"},
        {"reps", "replications"},
        {"out", "output directory"},
        {"workers", "worker threads"},
        {"levels", "table rows as J:n,J:n,..."},
    };
    for (const auto& [name, help] : flags) {
        registered[name] = app.add_option("--" + name, opts.values[name], help);
    }
    app.add_option("--config", opts.config_file, "key = value settings file")->check(CLI::ExistingFile);
    registered["svg"] = app.add_flag("--svg", opts.svg, "also write SVG plots");
    registered["paper-scale"] = app.add_flag("--paper-scale", opts.paper_scale, "full table rows and 30 replications");
}

// File settings first, then any flag given on the command line.
ExperimentConfig build_config(const Options& opts, const std::map<std::string, CLI::Option*>& registered,
                              bool& reps_given) {
    ExperimentConfig config;
    reps_given = false;
    if (!opts.config_file.empty()) {
        for (const auto& [key, value] : read_config_file(opts.config_file)) {
            apply_setting(config, key, value);
            reps_given = reps_given || key == "reps";
        }
    }
    for (const auto& [name, option] : registered) {
        if (option->count() == 0) {
            continue;
        }
        if (name == "svg") {
            config.svg = opts.svg;
        } else if (name == "paper-scale") {
            config.paper_scale = opts.paper_scale;
        } else {
            apply_setting(config, name, opts.values.at(name));
            reps_given = reps_given || name == "reps";
        }
    }
    return config;
}

int cmd_simulate(const ExperimentConfig& config) {
    config.validate_simulation();
    const HurstFamily family = parse_family(config.family);
    if (!satisfies_regularity_condition(family, config.J)) {
        std::cerr << "warning: H(t) < h_lo + 1/2 fails somewhere for " << family.describe() << '\n';
    }
    std::vector<std::uint64_t> seeds(config.reps);
    for (unsigned r = 0; r < config.reps; ++r) {
        seeds[r] = config.seed + r;
    }
    const auto paths = simulate_paths(family, config.sim_config(), seeds, config.workers);
    std::filesystem::create_directories(config.out);
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const auto file =
            config.out / (paths.size() == 1 ? std::string("path.csv") : "path_r" + std::to_string(r) + ".csv");
        io::write_path_csv(file, paths[r]);
        io::write_path_meta(file, paths[r]);
        std::cout << file.string() << ": " << paths[r].values.size() << " samples, seed " << paths[r].config.seed
                  << '\n';
        if (config.svg) {
            auto svg = file;
            svg.replace_extension(".svg");
            io::write_line_plot(svg, "Realization (" + family.describe() + ")", "t", "X(t)",
                                {{"X_J", "#1f4e9c", paths[r].times, paths[r].values}});
        }
    }
    return 0;
}

int cmd_estimate(const ExperimentConfig& config, const std::string& input, bool family_given) {
    if (input.empty()) {
        throw ConfigError("input", "estimate needs a path CSV");
    }
    const auto path = io::read_path_csv(input);
    ExperimentConfig checked = config;
    checked.n = path.n;
    checked.validate();
    const EstimatorConfig estimator = checked.estimator_config(path.n);
    const GridPathSource source(path.values);
    const auto series = estimate_hurst(source, estimator);
    std::optional<std::vector<double>> h_true;
    if (family_given) {
        const HurstFamily family = parse_family(config.family);
        if (family.has_limit()) {
            h_true = true_curve(family, series.interval_mids, config.J);
        }
    }
    std::filesystem::create_directories(config.out);
    const auto file = config.out / "estimate.csv";
    io::write_estimate_csv(file, series, h_true);
    std::cout << file.string() << ": " << series.h_raw.size() << " intervals at N = " << estimator.N << '\n';
    for (std::size_t p : series.degenerate) {
        std::cerr << "warning: interval " << p << " has zero variation at both resolutions; estimate set to 0\n";
    }
    return 0;
}

int cmd_selftest(std::uint64_t seed) {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
        failures += ok ? 0 : 1;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lam_dist(0.05, 0.95);
    std::uniform_real_distribution<double> x_dist(-2.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const KernelParam lam(lam_dist(rng));
        const double x = x_dist(rng);
        worst = std::max(worst, std::abs(kernel(lam, x) - oracle::kernel_quadrature(lam, x, 1e-10)));
    }
    report("kernel vs quadrature", worst <= 1e-8, "max error " + io::format_real(worst));

    double hat = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -0.5 + 2.0 * i / 1000.0;
        const double expected = (x > 0.0 && x < 1.0) ? std::min(x, 1.0 - x) : 0.0;
        hat = std::max(hat, std::abs(kernel(KernelParam(0.5), x) - expected));
    }
    report("hat function", hat <= 1e-14, "max error " + io::format_real(hat));

    const auto block = philox4x32({0, 0, 0, 0}, {0, 0});
    report("philox known answer", block[0] == 0x6627e8d5u && block[3] == 0x9b00dbd8u, "");

    bool moments = true;
    for (unsigned L = 2; L <= 6; ++L) {
        const auto a = increment_filter_exact(L);
        for (unsigned p = 0; p < L; ++p) {
            std::int64_t sum = 0;
            for (unsigned l = 0; l <= L; ++l) {
                std::int64_t power = 1;
                for (unsigned e = 0; e < p; ++e) {
                    power *= l;
                }
                sum += a[l] * power;
            }
            moments = moments && sum == 0;
        }
    }
    report("filter moments", moments, "L = 2..6");

    const auto fam = constant_family(0.5);
    const double exact = covariance(fam, 0.3, 0.7, 8);
    report("bridge covariance", std::abs(exact - 0.09) < 1e-3, "Cov(0.3, 0.7) = " + io::format_real(exact));

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
    return failures == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Haar-based multifractional process simulation and Hurst estimation"};
    app.require_subcommand(1);

    Options opts;
    std::map<std::string, std::map<std::string, CLI::Option*>> registered;
    std::map<std::string, Options> sub_opts;
    std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "write path CSV and metadata"},
        {"estimate", "estimate the Hurst function of a path CSV"},
        {"case", "simulate, estimate and plot one case"},
        {"table", "difference statistics over (J, n) rows and replications"},
        {"selftest", "closed-form formulas against independent references"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(*sub, sub_opts[name], registered[name]);
        subs[name] = sub;
    }
    subs["estimate"]->add_option("input", sub_opts["estimate"].input, "path CSV with header t,x");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) {
            command = name;
        }
    }
    try {
        bool reps_given = false;
        ExperimentConfig config = build_config(sub_opts[command], registered[command], reps_given);
        if (command == "simulate") {
            return cmd_simulate(config);
        }
        if (command == "estimate") {
            return cmd_estimate(config, sub_opts[command].input, registered[command]["family"]->count() > 0);
        }
        if (command == "case") {
            run_case(config, std::cout);
            return 0;
        }
        if (command == "table") {
            if (!reps_given) {
                config.reps = config.paper_scale ? 30 : 10;
            }
            if (config.family == ExperimentConfig{}.family && registered[command]["family"]->count() == 0) {
                config.family = "sinusoidal";
            }
            replicate_table(config, std::cout);
            return 0;
        }
        return cmd_selftest(config.seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
