#include "ghbmp/hurst_family.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ghbmp {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

double ramp_value(unsigned level, double t) {
    if (level == 0) {
        return 0.5;
    }
    const double j = static_cast<double>(level);
    const double half_width = 1.0 / (2.0 * j);
    if (t <= 0.5 - half_width) {
        return 0.25;
    }
    if (t >= 0.5 + half_width) {
        return 0.75;
    }
    return std::clamp(j * t / 2.0 + (0.5 - j / 4.0), 0.25, 0.75);
}

}  // namespace

HurstFamily::HurstFamily(Spec spec) : spec_(std::move(spec)) {
    if (!spec_.evaluator) {
        throw std::invalid_argument("Hurst family '" + spec_.name + "' has no evaluator");
    }
    if (!(spec_.h_lo > 0.0 && spec_.h_lo <= spec_.h_hi && spec_.h_hi < 1.0)) {
        throw std::invalid_argument("Hurst family '" + spec_.name + "' range [" + format_double(spec_.h_lo) +
                                    ", " + format_double(spec_.h_hi) + "] is not inside (0, 1)");
    }
}

double HurstFamily::exact_norm(unsigned level) const {
    if (!spec_.exact_norm) {
        throw FamilyError("family '" + spec_.name + "' has no closed-form Lipschitz norm");
    }
    return (*spec_.exact_norm)(level);
}

std::string HurstFamily::describe() const {
    std::string out = spec_.name;
    for (std::size_t i = 0; i < spec_.params.size(); ++i) {
        out += (i == 0 ? ':' : ',');
        out += format_double(spec_.params[i]);
    }
    return out;
}

HurstFamily constant_family(double h) {
    return HurstFamily({
        .name = "constant",
        .params = {h},
        .evaluator = [h](unsigned, double) { return h; },
        .h_lo = h,
        .h_hi = h,
        .limit = HurstFamily::Limit([h](double) { return h; }),
        .level_invariant = true,
        .exact_norm = HurstFamily::ExactNorm([h](unsigned) { return std::abs(h); }),
    });
}

HurstFamily linear_family(double intercept, double slope) {
    const double end = intercept + slope;
    return HurstFamily({
        .name = "linear",
        .params = {intercept, slope},
        .evaluator = [intercept, slope](unsigned, double t) { return intercept + slope * t; },
        .h_lo = std::min(intercept, end),
        .h_hi = std::max(intercept, end),
        .limit = HurstFamily::Limit([intercept, slope](double t) { return intercept + slope * t; }),
        .level_invariant = true,
        .exact_norm = HurstFamily::ExactNorm(
            [intercept, end, slope](unsigned) { return std::max(std::abs(intercept), std::abs(end)) + std::abs(slope); }),
    });
}

HurstFamily sinusoidal_family(double center, double amplitude, double cycles) {
    auto h = [center, amplitude, cycles](double t) {
        return center - amplitude * std::sin(2.0 * std::numbers::pi * cycles * t);
    };
    const double a = std::abs(amplitude);
    std::optional<HurstFamily::ExactNorm> norm;
    if (cycles >= 1.0) {
        // a full period is contained in [0, 1]
        norm = [center, a, cycles](unsigned) { return std::abs(center) + a + 2.0 * std::numbers::pi * cycles * a; };
    }
    return HurstFamily({
        .name = "sinusoidal",
        .params = {center, amplitude, cycles},
        .evaluator = [h](unsigned, double t) { return h(t); },
        .h_lo = center - a,
        .h_hi = center + a,
        .limit = HurstFamily::Limit(h),
        .level_invariant = true,
        .exact_norm = norm,
    });
}

HurstFamily ramp_family() {
    return HurstFamily({
        .name = "ramp",
        .params = {},
        .evaluator = ramp_value,
        .h_lo = 0.25,
        .h_hi = 0.75,
        .limit = HurstFamily::Limit([](double t) { return t <= 0.5 ? 0.25 : 0.75; }),
        .level_invariant = false,
        .exact_norm = HurstFamily::ExactNorm([](unsigned level) {
            return level == 0 ? 0.5 : 0.75 + static_cast<double>(level) / 2.0;
        }),
    });
}

HurstFamily custom_family(std::string name, HurstFamily::Evaluator evaluator, double h_lo, double h_hi,
                          std::optional<HurstFamily::Limit> limit) {
    return HurstFamily({
        .name = std::move(name),
        .params = {},
        .evaluator = std::move(evaluator),
        .h_lo = h_lo,
        .h_hi = h_hi,
        .limit = std::move(limit),
        .level_invariant = false,
        .exact_norm = std::nullopt,
    });
}

HurstFamily parse_family(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            const auto comma = rest.find(',', start);
            const std::string token = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
                throw std::invalid_argument("family parameter '" + token + "' is not a number");
            }
            params.push_back(value);
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
    }
    auto expect = [&](std::size_t lo, std::size_t hi) {
        if (params.size() < lo || params.size() > hi) {
            throw std::invalid_argument("family '" + name + "' takes between " + std::to_string(lo) + " and " +
                                        std::to_string(hi) + " parameters, got " + std::to_string(params.size()));
        }
    };
    if (name == "constant") {
        expect(0, 1);
        return constant_family(params.empty() ? 0.5 : params[0]);
    }
    if (name == "linear") {
        expect(0, 2);
        if (params.empty()) {
            return linear_family(0.2, 0.45);
        }
        expect(2, 2);
        return linear_family(params[0], params[1]);
    }
    if (name == "sinusoidal") {
        expect(0, 3);
        const double center = params.size() > 0 ? params[0] : 0.5;
        const double amplitude = params.size() > 1 ? params[1] : 0.4;
        const double cycles = params.size() > 2 ? params[2] : 3.0;
        return sinusoidal_family(center, amplitude, cycles);
    }
    if (name == "ramp") {
        expect(0, 0);
        return ramp_family();
    }
    throw std::invalid_argument("unknown Hurst family '" + name + "' (expected constant, linear, sinusoidal or ramp)");
}

double h_jk(const HurstFamily& family, const HaarIndex& idx) {
    idx.validate();
    const double value = family(idx.level, idx.left());
    if (!(value >= family.h_lo() && value <= family.h_hi())) {
        throw FamilyError("family '" + family.name() + "' returned H_" + std::to_string(idx.level) + "(" +
                          format_double(idx.left()) + ") = " + format_double(value) + " outside [" +
                          format_double(family.h_lo()) + ", " + format_double(family.h_hi()) + "]");
    }
    return value;
}

LipschitzEstimate lipschitz_norm(const HurstFamily& family, unsigned level, double grid_step) {
    if (!(grid_step > 0.0) || grid_step > 1.0) {
        throw std::invalid_argument("grid step must lie in (0, 1]");
    }
    const auto cells = static_cast<std::size_t>(std::ceil(1.0 / grid_step - 1e-9));
    const double step = 1.0 / static_cast<double>(cells);
    double sup = 0.0;
    double slope = 0.0;
    double previous = family(level, 0.0);
    sup = std::abs(previous);
    for (std::size_t i = 1; i <= cells; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(cells);
        const double value = family(level, t);
        sup = std::max(sup, std::abs(value));
        slope = std::max(slope, std::abs(value - previous) / step);
        previous = value;
    }
    return {.level = level, .nu = sup + slope, .grid_step = step};
}

double growth_check_step(unsigned level) noexcept {
    return std::ldexp(1.0, -static_cast<int>(std::max(level + 2, 12u)));
}

bool check_growth(const HurstFamily& family, double growth_constant, unsigned j_max) {
    if (!(growth_constant > 0.0)) {
        throw std::invalid_argument("growth constant must be positive");
    }
    for (unsigned j = 0; j <= j_max; ++j) {
        const auto estimate = lipschitz_norm(family, j, growth_check_step(j));
        if (estimate.nu > growth_constant * (1.0 + j)) {
            return false;
        }
    }
    return true;
}

double limit_hurst(const HurstFamily& family, double t) {
    if (!family.has_limit()) {
        throw FamilyError("family '" + family.name() + "' has no closed-form limit");
    }
    return (*family.spec().limit)(t);
}

double target_hurst(const HurstFamily& family, double t, unsigned level) {
    return family.has_limit() ? limit_hurst(family, t) : family(level, t);
}

bool satisfies_regularity_condition(const HurstFamily& family, unsigned probe_level) {
    constexpr int kProbes = 1024;
    for (int i = 1; i < kProbes; ++i) {
        const double t = static_cast<double>(i) / kProbes;
        if (!(target_hurst(family, t, probe_level) < family.h_lo() + 0.5)) {
            return false;
        }
    }
    return true;
}

}  // namespace ghbmp
