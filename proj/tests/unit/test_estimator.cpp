#include "ghbmp/estimator.hpp"

#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace ghbmp;

namespace {

std::vector<double> sampled(std::uint64_t N, double (*f)(double)) {
    std::vector<double> xs(N + 1);
    for (std::uint64_t i = 0; i <= N; ++i) {
        xs[i] = f(static_cast<double>(i) / static_cast<double>(N));
    }
    return xs;
}

// Exact self-similar variations: V_N / V_QN = Q^(2H) on every interval.
class ScalingSource final : public PathSource {
public:
    explicit ScalingSource(double h) : h_(h) {}
    std::vector<double> samples(std::uint64_t resolution) const override {
        // alternating signs give d^2 = (4 * N^-H)^2 on every increment
        std::vector<double> xs(resolution + 1);
        for (std::uint64_t i = 0; i <= resolution; ++i) {
            xs[i] = (i % 2 == 0 ? 1.0 : -1.0) * std::pow(static_cast<double>(resolution), -h_);
        }
        return xs;
    }

private:
    double h_;
};

}  // namespace

TEST_CASE("increment filter examples") {
    CHECK(increment_filter(2) == std::vector<double>{1.0, -2.0, 1.0});
    CHECK(increment_filter(3) == std::vector<double>{-1.0, 3.0, -3.0, 1.0});
    CHECK(increment_filter_exact(4) == std::vector<std::int64_t>{1, -4, 6, -4, 1});
    CHECK_THROWS_AS((void)increment_filter(1), EstimatorError);
}

TEST_CASE("increment filter has L vanishing moments") {
    for (unsigned L = 2; L <= 20; ++L) {
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
            CAPTURE(L);
            CAPTURE(p);
            CHECK(sum == 0);
        }
    }
}

TEST_CASE("generalized increments examples") {
    for (double d : generalized_increments(sampled(16, [](double) { return 4.2; }), 2)) {
        CHECK(d == 0.0);
    }
    for (double d : generalized_increments(sampled(16, [](double t) { return 3.0 * t + 1.0; }), 2)) {
        CHECK(d == 0.0);
    }
    const auto quad = generalized_increments(sampled(4, [](double t) { return t * t; }), 2);
    REQUIRE(quad.size() == 3);
    for (double d : quad) {
        CHECK(d == 0.125);
    }
    CHECK_THROWS_AS((void)generalized_increments(std::vector<double>{1.0, 2.0}, 2), EstimatorError);
}

TEST_CASE("increments annihilate polynomials below the filter order") {
    gen::for_all(61, 200, [](gen::Rng& rng, int) {
        const auto L = static_cast<unsigned>(rng.integer(2, 6));
        const auto degree = static_cast<unsigned>(rng.integer(0, L - 1));
        std::vector<double> coef(degree + 1);
        for (auto& c : coef) {
            c = rng.uniform(-2.0, 2.0);
        }
        const std::uint64_t N = 64;
        std::vector<double> xs(N + 1);
        double scale = 0.0;
        for (std::uint64_t i = 0; i <= N; ++i) {
            const double t = static_cast<double>(i) / N;
            double v = 0.0;
            for (std::size_t c = coef.size(); c-- > 0;) {
                v = v * t + coef[c];
            }
            xs[i] = v;
            scale = std::max(scale, std::abs(v));
        }
        for (double d : generalized_increments(xs, L)) {
            CHECK(std::abs(d) <= 1e-12 * std::max(scale, 1.0) * std::exp2(L));
        }
    });
}

TEST_CASE("variation support") {
    const auto s = variation_support(8, 2, {0.0, 0.25});
    CHECK(s.first == 0);
    CHECK(s.count == 3);
    const auto tail = variation_support(8, 2, {0.75, 1.0});
    CHECK(tail.first == 6);
    CHECK(tail.count == 1);
    CHECK(variation_support(8, 2, {0.8, 0.85}).count == 0);
    CHECK(variation_support(1, 2, {0.0, 1.0}).count == 0);
    // rational endpoints p / P hit k / N exactly
    const auto third = variation_support(300, 2, {1.0 / 3.0, 2.0 / 3.0});
    CHECK(third.first == 100);
    CHECK(third.count == 101);
}

TEST_CASE("variation supports of a partition cover every increment") {
    gen::for_all(62, 100, [](gen::Rng& rng, int) {
        const auto N = static_cast<std::uint64_t>(rng.integer(8, 5000));
        const auto L = static_cast<unsigned>(rng.integer(2, 5));
        const auto P = static_cast<unsigned>(rng.integer(1, 50));
        std::uint64_t covered = 0;
        for (const auto& interval : uniform_partition(P)) {
            const auto s = variation_support(N, L, interval);
            for (std::uint64_t k = s.first; k < s.first + s.count; ++k) {
                const double x = static_cast<double>(k) / N;
                CHECK(x >= interval.lo);
                CHECK(x <= interval.hi);
            }
            covered += s.count;
        }
        // shared endpoints are counted once per side
        CHECK(covered >= N - L + 1);
        CHECK(covered <= N - L + 1 + P - 1);
    });
}

TEST_CASE("quadratic variation examples") {
    const std::vector<double> zeros(7, 0.0);
    CHECK(quadratic_variation(zeros, 8, 2, {0.0, 1.0}) == 0.0);
    const std::vector<double> pair = {1.0, -1.0};
    CHECK(quadratic_variation(pair, 3, 2, {0.0, 1.0}) == 1.0);
    CHECK_THROWS_AS((void)quadratic_variation(zeros, 8, 2, {0.8, 0.85}), EstimatorError);
}

TEST_CASE("hurst_from_variations conventions") {
    bool degenerate = true;
    CHECK(hurst_from_variations(1.0, 1.0, 2, &degenerate) == 0.0);
    CHECK_FALSE(degenerate);
    CHECK(hurst_from_variations(0.5, 1.0, 2) == 0.0);
    CHECK(hurst_from_variations(1.0, 0.0, 2, &degenerate) == 1.0);
    CHECK_FALSE(degenerate);
    CHECK(hurst_from_variations(0.0, 0.0, 2, &degenerate) == 0.0);
    CHECK(degenerate);
    CHECK(hurst_from_variations(100.0, 1.0, 2) == 1.0);
    gen::for_all(63, 500, [](gen::Rng& rng, int) {
        const double h = rng.uniform(0.001, 0.999);
        const auto Q = static_cast<unsigned>(rng.integer(2, 8));
        const double fine = std::exp(rng.uniform(-20.0, 20.0));
        const double coarse = fine * std::pow(static_cast<double>(Q), 2.0 * h);
        CHECK(hurst_from_variations(coarse, fine, Q) == doctest::Approx(h).epsilon(1e-12));
        const double any = hurst_from_variations(std::exp(rng.uniform(-30.0, 30.0)), fine, Q);
        CHECK(any >= 0.0);
        CHECK(any <= 1.0);
    });
}

TEST_CASE("estimate_hurst recovers exact self-similar variations") {
    for (double h : {0.1, 0.5, 0.85}) {
        EstimatorConfig config;
        config.N = 256;
        config.P = 8;
        const auto series = estimate_hurst(ScalingSource(h), config);
        REQUIRE(series.h_raw.size() == 8);
        for (double v : series.h_raw) {
            CHECK(v == doctest::Approx(h).epsilon(1e-12));
        }
        CHECK(series.interval_mids.front() == 1.0 / 16.0);
        CHECK(series.degenerate.empty());
    }
}

TEST_CASE("estimate_hurst flags flat intervals") {
    std::vector<double> xs(1025, 0.0);
    for (std::size_t i = 513; i < xs.size(); ++i) {
        xs[i] = std::sin(static_cast<double>(i * i));
    }
    EstimatorConfig config;
    config.N = 512;
    config.P = 4;
    const auto series = estimate_hurst(GridPathSource(xs), config);
    CHECK(series.degenerate == std::vector<std::size_t>{0});
    CHECK(series.h_raw[0] == 0.0);
}

TEST_CASE("estimates are invariant under path scaling") {
    gen::for_all(64, 30, [](gen::Rng& rng, int) {
        auto xs = gen::normal_vector(rng, 1025);
        xs.front() = 0.0;
        EstimatorConfig config;
        config.N = 512;
        config.P = 20;
        const auto base = estimate_hurst(GridPathSource(xs), config);
        for (double gamma : {0.5, 2.0, 0.25, 1024.0, -4.0}) {
            auto scaled = xs;
            for (auto& v : scaled) {
                v *= gamma;
            }
            const auto other = estimate_hurst(GridPathSource(scaled), config);
            CHECK(other.h_raw == base.h_raw);
        }
    });
}

TEST_CASE("EstimatorConfig validation") {
    EstimatorConfig config;
    CHECK_NOTHROW(config.validate());
    config.Q = 1;
    CHECK_THROWS_AS(config.validate(), EstimatorError);
    config = {};
    config.L = 1;
    CHECK_THROWS_AS(config.validate(), EstimatorError);
    config = {};
    config.N = 1;
    CHECK_THROWS_AS(config.validate(), EstimatorError);
    config = {};
    config.P = 0;
    CHECK_THROWS_AS(config.validate(), EstimatorError);
    config = {};
    config.span = 0.0;
    CHECK_THROWS_AS(config.validate(), EstimatorError);
}

TEST_CASE("grid source strides and rejects resolutions off the grid") {
    std::vector<double> xs(17);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = static_cast<double>(i);
    }
    const GridPathSource source(xs);
    CHECK(source.samples(4) == std::vector<double>{0.0, 4.0, 8.0, 12.0, 16.0});
    CHECK(source.samples(16) == xs);
    CHECK_THROWS_AS((void)source.samples(3), EstimatorError);
    CHECK_THROWS_AS((void)source.samples(32), EstimatorError);
    CHECK_THROWS_AS(GridPathSource(std::vector<double>(10, 0.0)), EstimatorError);
    CHECK(default_resolution(10, 2) == 512);
    CHECK_THROWS_AS((void)default_resolution(10, 3), EstimatorError);
}

TEST_CASE("series source agrees with the grid engine and handles Q = 3") {
    const auto fam = constant_family(0.5);
    SimConfig config;
    config.J = 10;
    config.n = 6;
    config.seed = 4;
    const auto path = simulate_path(fam, config);
    const SeriesPathSource series(fam, config.J, config.seed);
    CHECK(series.samples(64) == path.values);
    CHECK(series.samples(16) == GridPathSource(path.values).samples(16));

    EstimatorConfig est;
    est.N = 27;
    est.Q = 3;
    est.P = 3;
    const auto out = estimate_hurst(series, est);
    CHECK(out.h_raw.size() == 3);
    const auto thirds = series.samples(81);
    CHECK(thirds.front() == 0.0);
    CHECK(thirds[27] == series.samples(3)[1]);
}

TEST_CASE("estimated H tracks constant-H paths") {
    for (double h : {0.3, 0.7}) {
        SimConfig config;
        config.J = 13;
        config.n = 12;
        config.seed = 21;
        const auto path = simulate_path(constant_family(h), config);
        EstimatorConfig est;
        est.N = 2048;
        est.P = 10;
        const auto series = estimate_hurst(GridPathSource(path.values), est);
        double mean = 0.0;
        for (double v : series.h_raw) {
            mean += v / series.h_raw.size();
        }
        CAPTURE(h);
        CHECK(mean == doctest::Approx(h).epsilon(0.1 / h));
    }
}
