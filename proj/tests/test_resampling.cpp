#include <doctest.h>

#include <cmath>

#include "panelval/common.hpp"
#include "panelval/metrics.hpp"
#include "panelval/resampling.hpp"
#include "test_support.hpp"

using namespace panelval;

namespace {

std::optional<double> sensitivity_stat(std::span<const OutcomePair> pairs) {
    std::size_t hit = 0, pos = 0;
    for (const auto& [pred, actual] : pairs) {
        if (actual) {
            ++pos;
            if (pred) ++hit;
        }
    }
    if (pos == 0) return std::nullopt;
    return static_cast<double>(hit) / static_cast<double>(pos);
}

std::optional<double> mean_stat(std::span<const double> xs) {
    double s = 0.0;
    for (const double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

} // namespace

TEST_CASE("quantile interpolation rule") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(quantile({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(quantile({1, 2, 3, 4}, 1.0) == 4.0);
    CHECK(quantile({4, 2, 1, 3}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({7.5}, 0.0) == 7.5);
    CHECK(quantile({7.5}, 0.31) == 7.5);
    CHECK(quantile({7.5}, 1.0) == 7.5);
    CHECK_THROWS_AS(quantile({}, 0.5), InputError);
    CHECK_THROWS_AS(quantile({1.0}, 1.5), InputError);
}

TEST_CASE("normal_quantile sanity") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.9995) == doctest::Approx(3.290526731).epsilon(1e-8));
    CHECK_THROWS_AS(normal_quantile(0.0), InputError);
}

TEST_CASE("bootstrap of a constant statistic degenerates to a point") {
    const std::vector<double> xs = {1, 2, 3, 4, 5};
    auto constant = [](std::span<const double>) -> std::optional<double> { return 0.7; };
    const IntervalEstimate ci = bootstrap_ci(std::span<const double>(xs), constant,
                                             BootstrapSpec{200, 99, 0.95});
    CHECK(ci.estimate == 0.7);
    CHECK(ci.lower == 0.7);
    CHECK(ci.upper == 0.7);
    CHECK(ci.n_valid_replicates == 200);
    CHECK(ci.n_undefined_replicates == 0);
}

TEST_CASE("bootstrap determinism across thread counts") {
    const auto pairs = testsupport::published_pairs();
    const BootstrapSpec spec{500, 12345, 0.95};
    const IntervalEstimate a =
        bootstrap_ci(std::span<const OutcomePair>(pairs), sensitivity_stat, spec, 1);
    const IntervalEstimate b =
        bootstrap_ci(std::span<const OutcomePair>(pairs), sensitivity_stat, spec, 8);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.estimate == b.estimate);
    CHECK(a.n_valid_replicates == b.n_valid_replicates);

    const IntervalEstimate c =
        bootstrap_ci(std::span<const OutcomePair>(pairs), sensitivity_stat,
                     BootstrapSpec{500, 54321, 0.95}, 1);
    CHECK(c.lower != a.lower);  // different seed moves the interval
}

TEST_CASE("sensitivity CI on the published table straddles the reported bounds") {
    const auto pairs = testsupport::published_pairs();
    const IntervalEstimate ci = bootstrap_ci(std::span<const OutcomePair>(pairs),
                                             sensitivity_stat, BootstrapSpec{2000, 7, 0.95});
    CHECK(ci.estimate == doctest::Approx(125.0 / 145.0).epsilon(1e-12));
    CHECK(ci.lower == doctest::Approx(0.80).epsilon(0.025));
    CHECK(ci.upper == doctest::Approx(0.92).epsilon(0.025));
    CHECK(ci.lower <= ci.estimate);
    CHECK(ci.estimate <= ci.upper);
}

TEST_CASE("undefined replicates are dropped and counted") {
    // One positive in two units: ~25% of resamples contain no positive.
    const std::vector<OutcomePair> pairs = {{true, true}, {false, false}};
    const IntervalEstimate ci = bootstrap_ci(std::span<const OutcomePair>(pairs),
                                             sensitivity_stat, BootstrapSpec{400, 3, 0.95});
    CHECK(ci.n_undefined_replicates > 0);
    CHECK(ci.n_valid_replicates + ci.n_undefined_replicates == 400);

    SUBCASE("statistic undefined on the full data is a precondition error") {
        const std::vector<OutcomePair> negatives = {{false, false}, {true, false}};
        CHECK_THROWS_AS(bootstrap_ci(std::span<const OutcomePair>(negatives), sensitivity_stat,
                                     BootstrapSpec{10, 1, 0.95}),
                        InputError);
    }
    SUBCASE("empty dataset is an error") {
        const std::vector<OutcomePair> none;
        CHECK_THROWS_AS(bootstrap_ci(std::span<const OutcomePair>(none), sensitivity_stat,
                                     BootstrapSpec{10, 1, 0.95}),
                        InputError);
    }
}

TEST_CASE("all-undefined replicates abort") {
    const std::vector<double> xs = {1, 2, 3};
    // defined on the full dataset only, recognized by its span identity
    const auto* base = xs.data();
    auto tricky = [&](std::span<const double> s) -> std::optional<double> {
        if (s.data() == base) return 1.0;
        return std::nullopt;
    };
    CHECK_THROWS_AS(bootstrap_ci(std::span<const double>(xs), tricky, BootstrapSpec{50, 1, 0.95}),
                    NumericalError);
}

TEST_CASE("every replicate resamples exactly n units") {
    const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7};
    auto size_probe = [&](std::span<const double> s) -> std::optional<double> {
        return static_cast<double>(s.size());
    };
    const IntervalEstimate ci =
        bootstrap_ci(std::span<const double>(xs), size_probe, BootstrapSpec{100, 5, 0.95});
    CHECK(ci.lower == 7.0);
    CHECK(ci.upper == 7.0);
}

TEST_CASE("percentile interval commutes with strictly increasing transforms") {
    // 2001 replicates at 50% confidence put both cut points on exact order
    // statistics (2000 * 0.25 and 2000 * 0.75 are integers in floating
    // point), so the interval of exp(stat) must equal exp of the interval
    // bit for bit.
    std::vector<double> xs;
    RandomStream rs(31337);
    for (int i = 0; i < 40; ++i) xs.push_back(rs.uniform() * 3.0);
    const BootstrapSpec spec{2001, 77, 0.5};
    auto exp_mean = [](std::span<const double> s) -> std::optional<double> {
        return std::exp(*mean_stat(s));
    };
    const IntervalEstimate plain = bootstrap_ci(std::span<const double>(xs), mean_stat, spec);
    const IntervalEstimate mapped = bootstrap_ci(std::span<const double>(xs), exp_mean, spec);
    CHECK(mapped.lower == std::exp(plain.lower));
    CHECK(mapped.upper == std::exp(plain.upper));
}

TEST_CASE("interval width shrinks as the dataset grows") {
    RandomStream gen(2024);
    std::vector<double> small(60), large(240);
    for (auto& x : small) x = gen.bernoulli(0.3) ? 1.0 : 0.0;
    for (auto& x : large) x = gen.bernoulli(0.3) ? 1.0 : 0.0;
    double width_small = 0.0, width_large = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const BootstrapSpec spec{400, seed, 0.95};
        const auto a = bootstrap_ci(std::span<const double>(small), mean_stat, spec);
        const auto b = bootstrap_ci(std::span<const double>(large), mean_stat, spec);
        width_small += a.upper - a.lower;
        width_large += b.upper - b.lower;
    }
    CHECK(width_large / 20.0 < width_small / 20.0);
}

TEST_CASE("power_simulation Wald half-widths match the analytic values") {
    PowerSpec ps;
    ps.sensitivity = 0.862;
    ps.specificity = 0.935;
    ps.prevalence = 0.233;
    ps.sims = 1000;
    ps.target_halfwidth = 0.07;
    ps.seed = 11;

    SUBCASE("n = 622") {
        ps.n = 622;
        const PowerReport r = power_simulation(ps, 2);
        // Wald oracle: 1.96 * sqrt(0.862*0.138/145) = 0.0561
        CHECK(r.mean_sens_halfwidth == doctest::Approx(0.056).epsilon(0.09));
        CHECK(r.n_defined == 1000);
    }
    SUBCASE("n = 400") {
        ps.n = 400;
        const PowerReport r = power_simulation(ps, 2);
        // Wald oracle with ~93.2 expected positives: 0.0700
        CHECK(r.mean_sens_halfwidth == doctest::Approx(0.070).epsilon(0.08));
    }
}

TEST_CASE("power_simulation perfect test") {
    PowerSpec ps;
    ps.sensitivity = 1.0;
    ps.specificity = 1.0;
    ps.prevalence = 0.3;
    ps.n = 200;
    ps.sims = 50;
    ps.target_halfwidth = 0.05;
    ps.seed = 5;
    const PowerReport r = power_simulation(ps);
    CHECK(r.mean_sens_halfwidth == 0.0);
    CHECK(r.mean_spec_halfwidth == 0.0);
    CHECK(r.fraction_adequate == 1.0);
}

TEST_CASE("power_simulation rejects degenerate prevalence") {
    PowerSpec ps;
    ps.prevalence = 0.0;
    CHECK_THROWS_AS(power_simulation(ps), InputError);
    ps.prevalence = 1.0;
    CHECK_THROWS_AS(power_simulation(ps), InputError);
}

TEST_CASE("power_simulation bootstrap mode runs and broadly agrees with Wald") {
    PowerSpec ps;
    ps.sensitivity = 0.85;
    ps.specificity = 0.9;
    ps.prevalence = 0.4;
    ps.n = 150;
    ps.sims = 20;
    ps.seed = 9;
    ps.target_halfwidth = 0.2;
    ps.method = PowerMethod::bootstrap;
    ps.bootstrap_replicates = 300;
    const PowerReport boot = power_simulation(ps, 2);
    ps.method = PowerMethod::wald;
    const PowerReport wald = power_simulation(ps, 2);
    CHECK(boot.mean_sens_halfwidth ==
          doctest::Approx(wald.mean_sens_halfwidth).epsilon(0.15));
}
