#include "ghbmp/hurst_family.hpp"

#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ghbmp;

TEST_CASE("h_jk examples") {
    const auto constant = constant_family(0.5);
    for (unsigned j = 0; j < 10; ++j) {
        CHECK(h_jk(constant, {j, (std::int64_t{1} << j) - 1}) == 0.5);
    }
    CHECK(h_jk(linear_family(0.2, 0.45), {1, 1}) == doctest::Approx(0.425).epsilon(1e-15));
    CHECK(ramp_family()(2, 0.5) == 0.5);
    CHECK(h_jk(ramp_family(), {2, 2}) == 0.5);
}

TEST_CASE("h_jk reports families that leave their declared range") {
    const auto bad = custom_family("bad", [](unsigned, double t) { return 0.3 + t; }, 0.3, 0.9);
    CHECK_NOTHROW((void)h_jk(bad, {2, 2}));
    CHECK_THROWS_AS((void)h_jk(bad, {3, 7}), FamilyError);
}

TEST_CASE("family constructors validate their ranges") {
    CHECK_THROWS_AS((void)constant_family(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)constant_family(1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)linear_family(0.5, 0.6), std::invalid_argument);
    CHECK_THROWS_AS((void)sinusoidal_family(0.5, 0.6, 3.0), std::invalid_argument);
}

TEST_CASE("lipschitz_norm examples") {
    for (unsigned j : {0u, 3u, 10u}) {
        CHECK(lipschitz_norm(constant_family(0.5), j, growth_check_step(j)).nu == 0.5);
        CHECK(lipschitz_norm(linear_family(0.2, 0.45), j, growth_check_step(j)).nu ==
              doctest::Approx(1.1).epsilon(1e-12));
    }
    for (unsigned j = 1; j <= 20; ++j) {
        CAPTURE(j);
        const auto est = lipschitz_norm(ramp_family(), j, growth_check_step(j));
        CHECK(est.level == j);
        CHECK(est.nu == doctest::Approx(0.75 + j / 2.0).epsilon(1e-9));
        CHECK(est.nu <= ramp_family().exact_norm(j) + 1e-12);
    }
    const auto sine = lipschitz_norm(sinusoidal_family(), 4, 1e-5);
    CHECK(sine.nu == doctest::Approx(0.9 + 2.4 * std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("lipschitz_norm is at least the sup of |H| on the grid") {
    gen::for_all(31, 50, [](gen::Rng& rng, int) {
        const auto fam = gen::family(rng);
        const auto j = static_cast<unsigned>(rng.integer(0, 12));
        const auto est = lipschitz_norm(fam, j, growth_check_step(j));
        for (int i = 0; i <= 64; ++i) {
            CHECK(est.nu >= std::abs(fam(j, i / 64.0)));
        }
    });
}

TEST_CASE("check_growth examples") {
    CHECK(check_growth(constant_family(0.5), 1.0, 20));
    CHECK(check_growth(ramp_family(), 1.0, 20));
    CHECK_FALSE(check_growth(ramp_family(), 0.4, 20));
    CHECK(check_growth(sinusoidal_family(), 8.5, 20));
    CHECK_FALSE(check_growth(sinusoidal_family(), 1.0, 0));
}

TEST_CASE("limit_hurst examples") {
    const auto ramp = ramp_family();
    CHECK(limit_hurst(ramp, 0.25) == 0.25);
    CHECK(limit_hurst(ramp, 0.75) == 0.75);
    CHECK(limit_hurst(ramp, 0.5) == 0.25);
    CHECK(limit_hurst(sinusoidal_family(), 0.25) == doctest::Approx(0.9).epsilon(1e-15));
    const auto opaque = custom_family("opaque", [](unsigned, double) { return 0.4; }, 0.4, 0.4);
    CHECK_THROWS_AS((void)limit_hurst(opaque, 0.5), FamilyError);
    CHECK(target_hurst(opaque, 0.5, 7) == 0.4);
}

TEST_CASE("every family stays inside its declared range") {
    gen::for_all(32, 10000, [](gen::Rng& rng, int) {
        static const std::vector<HurstFamily> families = {constant_family(0.3), linear_family(0.2, 0.45),
                                                          sinusoidal_family(), ramp_family()};
        const auto& fam = families[static_cast<std::size_t>(rng.integer(0, 3))];
        const auto j = static_cast<unsigned>(rng.integer(0, 24));
        const double t = rng.uniform(0.0, 1.0);
        const double h = fam(j, t);
        CHECK(h >= fam.h_lo());
        CHECK(h <= fam.h_hi());
    });
}

TEST_CASE("ramp is continuous at both breakpoints") {
    const auto ramp = ramp_family();
    for (unsigned j = 1; j <= 24; ++j) {
        for (double sign : {-1.0, 1.0}) {
            const double b = 0.5 + sign / (2.0 * j);
            if (b <= 0.0 || b >= 1.0) {
                continue;
            }
            const double eps = 1e-14;
            CAPTURE(j);
            CHECK(std::abs(ramp(j, b - eps) - ramp(j, b + eps)) <= 1e-12);
        }
    }
    CHECK(ramp(0, 0.1) == 0.5);
    CHECK(ramp(1, 0.0) == 0.25);
    CHECK(ramp(1, 1.0) == 0.75);
}

TEST_CASE("ramp converges pointwise away from one half") {
    const auto ramp = ramp_family();
    gen::for_all(33, 2000, [&](gen::Rng& rng, int) {
        const double t = rng.uniform(0.0, 1.0);
        if (std::abs(2.0 * t - 1.0) < 1e-6) {
            return;
        }
        const auto start = static_cast<unsigned>(std::floor(1.0 / std::abs(2.0 * t - 1.0))) + 1;
        for (unsigned j = start; j < start + 5; ++j) {
            CHECK(ramp(j, t) == limit_hurst(ramp, t));
        }
    });
}

TEST_CASE("level-invariant families have the level-0 function as limit") {
    for (const auto& fam : {constant_family(0.7), linear_family(0.2, 0.45), sinusoidal_family()}) {
        CHECK(fam.level_invariant());
        for (int i = 0; i <= 100; ++i) {
            const double t = i / 100.0;
            CHECK(limit_hurst(fam, t) == fam(0, t));
        }
    }
}

TEST_CASE("parse_family round-trips through describe") {
    for (const char* text : {"constant", "constant:0.3", "linear", "linear:0.1,0.5", "sinusoidal",
                             "sinusoidal:0.5,0.3,2", "ramp"}) {
        CAPTURE(text);
        const auto fam = parse_family(text);
        const auto again = parse_family(fam.describe());
        CHECK(again.describe() == fam.describe());
        for (int i = 0; i <= 20; ++i) {
            CHECK(again(5, i / 20.0) == fam(5, i / 20.0));
        }
    }
    CHECK(parse_family("linear")(0, 1.0) == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(parse_family("constant")(3, 0.2) == 0.5);
}

TEST_CASE("parse_family rejects malformed text") {
    for (const char* text : {"", "brownian", "constant:", "constant:abc", "constant:0.5,0.2", "linear:0.2",
                             "ramp:1", "constant:1.5", "sinusoidal:0.5,0.6"}) {
        CAPTURE(text);
        CHECK_THROWS_AS((void)parse_family(text), std::invalid_argument);
    }
}

TEST_CASE("regularity condition check") {
    CHECK(satisfies_regularity_condition(constant_family(0.5)));
    CHECK(satisfies_regularity_condition(linear_family(0.2, 0.45)));
    CHECK_FALSE(satisfies_regularity_condition(sinusoidal_family()));
    CHECK_FALSE(satisfies_regularity_condition(ramp_family()));
}
