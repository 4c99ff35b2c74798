#include <doctest.h>

#include <cmath>

#include "panelval/calibration.hpp"
#include "panelval/common.hpp"
#include "panelval/rng.hpp"

using namespace panelval;

namespace {

ProbabilitySeries series(std::initializer_list<double> p, std::initializer_list<bool> y) {
    return ProbabilitySeries::create(std::vector<double>(p), std::vector<bool>(y));
}

// y ~ Bernoulli(p) with p uniform: perfectly calibrated by construction.
ProbabilitySeries calibrated_sim(std::size_t n, std::uint64_t seed) {
    RandomStream rs(stream_seed(seed, 1));
    std::vector<double> p(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = rs.uniform();
        y[i] = rs.bernoulli(p[i]);
    }
    return ProbabilitySeries::create(std::move(p), std::move(y));
}

// O(n^2) oracle: every (positive, negative) pair scored 1/0.5/0.
double c_index_brute_force(const ProbabilitySeries& s) {
    std::uint64_t num2 = 0, pairs = 0;
    for (Eigen::Index i = 0; i < s.p.size(); ++i) {
        if (!s.y[i]) continue;
        for (Eigen::Index j = 0; j < s.p.size(); ++j) {
            if (s.y[j]) continue;
            ++pairs;
            if (s.p[i] > s.p[j]) num2 += 2;
            else if (s.p[i] == s.p[j]) num2 += 1;
        }
    }
    return static_cast<double>(num2) / (2.0 * static_cast<double>(pairs));
}

} // namespace

TEST_CASE("brier score") {
    CHECK(brier(series({1.0, 0.0, 1.0}, {true, false, true})) == 0.0);
    CHECK(brier(series({0.5, 0.5, 0.5, 0.5}, {true, false, true, false})) == 0.25);
    CHECK(brier(series({0.8, 0.4}, {true, false})) == doctest::Approx(0.10).epsilon(1e-12));

    SUBCASE("constant predictor at the base rate scores r(1-r)") {
        // r = 0.5 is exactly representable; identity is exact in floating point
        const auto half = series({0.5, 0.5, 0.5, 0.5}, {true, true, false, false});
        CHECK(brier(half) == 0.25);
        std::vector<double> p(10, 0.3);
        std::vector<bool> y(10, false);
        for (int i = 0; i < 3; ++i) y[static_cast<std::size_t>(i)] = true;
        CHECK(brier(ProbabilitySeries::create(p, y)) ==
              doctest::Approx(0.3 * 0.7).epsilon(1e-14));
    }
}

TEST_CASE("c_index basics") {
    CHECK(c_index(series({0.9, 0.1}, {true, false})) == 1.0);
    CHECK(c_index(series({0.4, 0.4, 0.4}, {true, false, true})) == 0.5);
    CHECK(c_index(series({0.9, 0.3, 0.5, 0.2}, {true, true, false, false})) == 0.75);
    CHECK_THROWS_AS(c_index(series({0.9, 0.1}, {true, true})), InputError);
}

TEST_CASE("c_index equals brute-force pair counting") {
    RandomStream rs(24601);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rs.uniform_index(199);
        std::vector<double> p(n);
        std::vector<bool> y(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            p[i] = static_cast<double>(rs.uniform_index(8)) / 7.0;
            y[i] = rs.bernoulli(0.4);
            (y[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos) y[0] = true;
        if (!has_neg) y[n - 1] = false;
        const ProbabilitySeries s = ProbabilitySeries::create(p, y);
        CHECK(c_index(s) == c_index_brute_force(s));  // exact, both count integers
    }
}

TEST_CASE("c_index is invariant under increasing transforms; brier is not") {
    const ProbabilitySeries s = calibrated_sim(400, 7);
    std::vector<double> squeezed(s.size());
    std::vector<bool> y(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        squeezed[i] = expit(3.0 * clamped_logit(s.p[static_cast<Eigen::Index>(i)]) - 0.4);
        y[i] = s.y[static_cast<Eigen::Index>(i)];
    }
    const ProbabilitySeries t = ProbabilitySeries::create(squeezed, y);
    CHECK(c_index(t) == c_index(s));
    CHECK(brier(t) != brier(s));
}

TEST_CASE("fit_recalibration recovers the identity on calibrated data") {
    const RecalibrationFit f = fit_recalibration(calibrated_sim(5000, 42));
    CHECK(std::abs(f.intercept - 0.0) <= 0.05);
    CHECK(std::abs(f.slope - 1.0) <= 0.05);
}

TEST_CASE("fit_recalibration recovers a known miscalibration") {
    RandomStream rs(777);
    const std::size_t n = 10000;
    std::vector<double> p(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = 0.02 + 0.96 * rs.uniform();
        y[i] = rs.bernoulli(expit(0.5 + 2.0 * clamped_logit(p[i])));
    }
    const RecalibrationFit f = fit_recalibration(ProbabilitySeries::create(p, y));
    CHECK(std::abs(f.intercept - 0.5) <= 0.1);
    CHECK(std::abs(f.slope - 2.0) <= 0.1);
}

TEST_CASE("fit_recalibration failure modes") {
    SUBCASE("complete separation") {
        CHECK_THROWS_AS(
            fit_recalibration(series({0.9, 0.8, 0.2, 0.1}, {true, true, false, false})),
            NumericalError);
    }
    SUBCASE("constant predictor, slope unidentifiable") {
        CHECK_THROWS_AS(fit_recalibration(series({0.5, 0.5, 0.5, 0.5}, {true, false, true, false})),
                        NumericalError);
    }
    SUBCASE("single outcome class") {
        CHECK_THROWS_AS(fit_recalibration(series({0.2, 0.9}, {true, true})), InputError);
    }
}

TEST_CASE("bias-corrected calibration on perfectly calibrated data") {
    const ProbabilitySeries s = calibrated_sim(5000, 42);
    const CalibrationReport r =
        bias_corrected_calibration(s, BootstrapSpec{2000, 295, 0.95}, {}, 2);
    CHECK(r.corrected_slope >= 0.95);
    CHECK(r.corrected_slope <= 1.05);
    CHECK(r.corrected_intercept >= -0.05);
    CHECK(r.corrected_intercept <= 0.05);
    CHECK(r.emax <= 0.03);
    CHECK(r.emax >= 0.0);
    CHECK(r.mean_abs_error >= 0.0);
    CHECK(r.replicates == 2000);
    CHECK(r.failed_replicates == 0);
    CHECK(r.brier == doctest::Approx(1.0 / 6.0).epsilon(0.05));
    CHECK(r.c_index == doctest::Approx(5.0 / 6.0).epsilon(0.02));

    SUBCASE("curve grid spans the observed range, strictly increasing") {
        CHECK(r.curve.size() == 100);
        CHECK(r.curve.front().predicted == s.p.minCoeff());
        CHECK(r.curve.back().predicted == s.p.maxCoeff());
        for (std::size_t g = 1; g < r.curve.size(); ++g) {
            CHECK(r.curve[g].predicted > r.curve[g - 1].predicted);
        }
    }
}

TEST_CASE("zero-resampling mode collapses the correction") {
    const ProbabilitySeries s = calibrated_sim(800, 3);
    CalibrationOptions opts;
    opts.resample = false;
    const CalibrationReport r = bias_corrected_calibration(s, BootstrapSpec{50, 1, 0.95}, opts);
    for (const auto& pt : r.curve) {
        CHECK(pt.bias_corrected == doctest::Approx(pt.apparent).epsilon(1e-12));
    }
    CHECK(r.corrected_slope == doctest::Approx(r.apparent.slope).epsilon(1e-12));
    CHECK(r.corrected_intercept ==
          doctest::Approx(r.apparent.intercept).scale(1.0).epsilon(1e-12));
}

TEST_CASE("bias-corrected calibration is deterministic in seed and threads") {
    const ProbabilitySeries s = calibrated_sim(600, 9);
    const BootstrapSpec spec{300, 77, 0.95};
    const CalibrationReport a = bias_corrected_calibration(s, spec, {}, 1);
    const CalibrationReport b = bias_corrected_calibration(s, spec, {}, 4);
    CHECK(a.corrected_slope == b.corrected_slope);
    CHECK(a.corrected_intercept == b.corrected_intercept);
    CHECK(a.emax == b.emax);
    CHECK(a.mean_abs_error == b.mean_abs_error);
    for (std::size_t g = 0; g < a.curve.size(); ++g) {
        CHECK(a.curve[g].bias_corrected == b.curve[g].bias_corrected);
    }
}

TEST_CASE("replicate failure budget aborts pathological series") {
    // Six points, barely overlapping: many resamples separate completely.
    const ProbabilitySeries s =
        series({0.9, 0.8, 0.52, 0.48, 0.2, 0.1}, {true, true, false, true, false, false});
    CHECK_THROWS_AS(bias_corrected_calibration(s, BootstrapSpec{200, 4, 0.95}),
                    NumericalError);
}
