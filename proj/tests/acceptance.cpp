// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its tolerances and runtime budget in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "grid_oracle.hpp"
#include "panelval/calibration.hpp"
#include "panelval/consensus.hpp"
#include "panelval/latent_class.hpp"
#include "panelval/metrics.hpp"
#include "panelval/panel_sim.hpp"
#include "panelval/pets.hpp"
#include "panelval/resampling.hpp"
#include "panelval/rng.hpp"
#include "test_support.hpp"

using namespace panelval;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

void run_criterion(int id, const std::string& name, double budget_ms,
                   const std::function<void(Outcome&)>& body) {
    Outcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(outcome);
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (ms > budget_ms) {
        outcome.pass = false;
        outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::string("over budget ") +
                          std::to_string(ms) + " ms > " + std::to_string(budget_ms) + " ms";
    }
    std::printf("[%s] criterion %d: %s (%.1f ms)%s%s\n", outcome.pass ? "PASS" : "FAIL", id,
                name.c_str(), ms, outcome.detail.empty() ? "" : " -- ",
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++g_failures;
}

bool within(double value, double target, double tol) {
    return std::abs(value - target) <= tol;
}

// --------------------------------------------------------------------------

void criterion_1_metrics(Outcome& o) {
    const ContingencyTable table = testsupport::published_contingency();
    const auto t0 = std::chrono::steady_clock::now();
    const MetricSuite m = compute_metrics(table);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    o.require(ms < 1.0, "compute_metrics took " + std::to_string(ms) + " ms");

    const std::pair<const char*, double> expected[] = {
        {"sensitivity", 0.86}, {"specificity", 0.94}, {"ppv", 0.80},  {"npv", 0.96},
        {"f1", 0.83},          {"balanced_accuracy", 0.90}, {"mcc", 0.78}, {"jaccard", 0.71}};
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        const auto value = m.by_index(k);
        o.require(value.has_value(), std::string(expected[k].first) + " undefined");
        if (value.has_value()) {
            o.require(within(*value, expected[k].second, 0.005),
                      std::string(expected[k].first) + " = " + std::to_string(*value) +
                          " vs " + std::to_string(expected[k].second));
        }
    }
}

void criterion_2_kappa(Outcome& o) {
    const KappaResult r = fleiss_kappa(testsupport::validator_panel());
    o.require(r.kappa.has_value(), "kappa undefined");
    if (r.kappa.has_value()) {
        o.require(within(*r.kappa, 0.909, 0.001),
                  "kappa = " + std::to_string(*r.kappa) + " vs 0.909 +/- 0.001");
    }
}

void criterion_3_consensus(Outcome& o) {
    std::vector<std::string> ids;
    const LabelScheme scheme = LabelScheme::binary();
    const LabelCode w = scheme.find("wellness");
    const LabelCode other = scheme.find("other");
    VoteMatrix cells(8, 3);
    int row = 0;
    for (const auto& p : testsupport::validator_patterns()) {
        ids.push_back("pattern" + std::to_string(row));
        for (int j = 0; j < 3; ++j) {
            cells(row, j) = p.votes[static_cast<std::size_t>(j)] == 'W' ? w : other;
        }
        ++row;
    }
    const AnnotationTable table(scheme, ids, {"v1", "v2", "v3"}, cells);
    const ReferenceLabeling ref = majority_reference(table);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& expected = testsupport::validator_patterns()[i];
        o.require(ref.visits()[i].label.has_value(),
                  "pattern " + std::to_string(i) + " has no consensus");
        if (ref.visits()[i].label.has_value()) {
            const LabelCode want = expected.reference == 'W' ? w : other;
            o.require(*ref.visits()[i].label == want,
                      "pattern " + std::to_string(i) + " mapped to the wrong label");
        }
    }
}

void criterion_4_bootstrap(Outcome& o) {
    const auto pairs = testsupport::published_pairs();
    struct Band {
        const char* name;
        double lo, hi;
    };
    const Band bands[kMetricCount] = {{"sensitivity", 0.80, 0.92}, {"specificity", 0.91, 0.96},
                                      {"ppv", 0.74, 0.86},         {"npv", 0.94, 0.97},
                                      {"f1", 0.78, 0.87},          {"balanced_accuracy", 0.87, 0.93},
                                      {"mcc", 0.72, 0.83},         {"jaccard", 0.64, 0.78}};
    const MetricSuite point = compute_metrics(contingency_from_pairs(pairs));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const BootstrapSpec spec{2000, seed, 0.95};
        const auto values = bootstrap_replicates(
            std::span<const OutcomePair>(pairs), kMetricCount,
            [](std::span<const OutcomePair> resample, std::span<std::optional<double>> out) {
                const MetricSuite m = compute_metrics(contingency_from_pairs(resample));
                for (std::size_t k = 0; k < kMetricCount; ++k) out[k] = m.by_index(k);
            },
            spec, 2);
        for (std::size_t k = 0; k < kMetricCount; ++k) {
            std::vector<std::optional<double>> column(spec.replicates);
            for (std::size_t r = 0; r < spec.replicates; ++r) {
                column[r] = values[r * kMetricCount + k];
            }
            const IntervalEstimate ci =
                detail::summarize_replicates(*point.by_index(k), column, spec.confidence);
            const std::string tag =
                std::string(bands[k].name) + "@seed" + std::to_string(seed);
            o.require(within(ci.lower, bands[k].lo, 0.02),
                      tag + " lower " + std::to_string(ci.lower) + " vs " +
                          std::to_string(bands[k].lo));
            o.require(within(ci.upper, bands[k].hi, 0.02),
                      tag + " upper " + std::to_string(ci.upper) + " vs " +
                          std::to_string(bands[k].hi));
        }
    }
}

void criterion_5_em(Outcome& o) {
    // (a) monotone log-likelihood on 100 random panels
    RandomStream rs(140);
    for (int rep = 0; rep < 100; ++rep) {
        PanelDesign d;
        d.prevalence = 0.1 + 0.8 * rs.uniform();
        const std::size_t n_raters = 3 + rs.uniform_index(2);
        for (std::size_t j = 0; j < n_raters; ++j) {
            d.raters.push_back({0.55 + 0.44 * rs.uniform(), 0.55 + 0.44 * rs.uniform()});
        }
        d.n = 40 + rs.uniform_index(400);
        d.seed = rs.next_u64();
        const EmFit fit =
            em_fit(VotePatternTable::from_annotations(simulate_panel(d).table));
        for (std::size_t i = 1; i < fit.trace.log_likelihoods.size(); ++i) {
            if (fit.trace.log_likelihoods[i] < fit.trace.log_likelihoods[i - 1] - 1e-9) {
                o.require(false, "log-likelihood decreased on panel " + std::to_string(rep));
                break;
            }
        }
    }

    // (b) parameter recovery within 0.01 on the n=50000 panel
    PanelDesign d;
    d.prevalence = 0.25;
    d.raters = {{0.95, 0.97}, {0.90, 0.95}, {0.85, 0.93}};
    d.n = 50000;
    d.seed = 20240229;
    const EmFit fit = em_fit(VotePatternTable::from_annotations(simulate_panel(d).table));
    o.require(fit.trace.converged, "recovery fit did not converge");
    o.require(within(fit.model.prevalence, 0.25, 0.01),
              "prevalence " + std::to_string(fit.model.prevalence));
    for (int j = 0; j < 3; ++j) {
        o.require(within(fit.model.se[j], d.raters[static_cast<std::size_t>(j)].sensitivity, 0.01),
                  "se" + std::to_string(j) + " = " + std::to_string(fit.model.se[j]));
        o.require(within(fit.model.sp[j], d.raters[static_cast<std::size_t>(j)].specificity, 0.01),
                  "sp" + std::to_string(j) + " = " + std::to_string(fit.model.sp[j]));
    }

    // (c) em_fit beats an 11-point-per-parameter grid search
    const VotePatternTable tiny = testsupport::tiny_instance();
    const double em_ll = log_likelihood(em_fit(tiny).model, tiny);
    const double grid_ll = testsupport::grid_search_max_loglik(tiny, 11);
    o.require(em_ll >= grid_ll - 1e-6, "em " + std::to_string(em_ll) + " < grid " +
                                           std::to_string(grid_ll) + " - 1e-6");

    // (d) bootstrap interval coverage at n=5000, 100 seeded trials
    const double truth[7] = {0.25, 0.95, 0.90, 0.85, 0.97, 0.95, 0.93};
    int covered[7] = {0, 0, 0, 0, 0, 0, 0};
    for (int trial = 0; trial < 100; ++trial) {
        PanelDesign cd;
        cd.prevalence = 0.25;
        cd.raters = {{0.95, 0.97}, {0.90, 0.95}, {0.85, 0.93}};
        cd.n = 5000;
        cd.seed = 7 + 17 * static_cast<std::uint64_t>(trial);
        const VotePatternTable data =
            VotePatternTable::from_annotations(simulate_panel(cd).table);
        const EmBootstrapResult r = em_bootstrap_ci(
            data, BootstrapSpec{800, 7 + 31 * static_cast<std::uint64_t>(trial) + 1, 0.95}, {},
            2);
        const IntervalEstimate* ivs[7] = {&r.prevalence, &r.se[0], &r.se[1], &r.se[2],
                                          &r.sp[0],      &r.sp[1], &r.sp[2]};
        for (int k = 0; k < 7; ++k) {
            if (ivs[k]->lower <= truth[k] && truth[k] <= ivs[k]->upper) ++covered[k];
        }
    }
    const char* param_names[7] = {"prevalence", "se1", "se2", "se3", "sp1", "sp2", "sp3"};
    for (int k = 0; k < 7; ++k) {
        o.require(covered[k] >= 90, std::string(param_names[k]) + " covered " +
                                        std::to_string(covered[k]) + "/100");
    }
}

void criterion_6_calibration(Outcome& o) {
    // perfectly calibrated simulation: p ~ U(0,1), y ~ Bernoulli(p)
    RandomStream rs(stream_seed(42, 1));
    std::vector<double> p(5000);
    std::vector<bool> y(5000);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = rs.uniform();
        y[i] = rs.bernoulli(p[i]);
    }
    const ProbabilitySeries series = ProbabilitySeries::create(std::move(p), std::move(y));
    const CalibrationReport r =
        bias_corrected_calibration(series, BootstrapSpec{2000, 295, 0.95}, {}, 2);
    o.require(r.corrected_slope >= 0.95 && r.corrected_slope <= 1.05,
              "corrected slope " + std::to_string(r.corrected_slope));
    o.require(r.corrected_intercept >= -0.05 && r.corrected_intercept <= 0.05,
              "corrected intercept " + std::to_string(r.corrected_intercept));
    o.require(r.emax <= 0.03, "emax " + std::to_string(r.emax));

    // c_index equals brute force exactly on random series up to n=200
    RandomStream cs(8899);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + cs.uniform_index(199);
        std::vector<double> cp(n);
        std::vector<bool> cy(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            cp[i] = static_cast<double>(cs.uniform_index(10)) / 9.0;
            cy[i] = cs.bernoulli(0.5);
            (cy[i] ? pos : neg) = true;
        }
        if (!pos) cy[0] = true;
        if (!neg) cy[n - 1] = false;
        const ProbabilitySeries s = ProbabilitySeries::create(cp, cy);
        std::uint64_t num2 = 0, npairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!cy[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (cy[j]) continue;
                ++npairs;
                if (cp[i] > cp[j]) num2 += 2;
                else if (cp[i] == cp[j]) num2 += 1;
            }
        }
        const double brute =
            static_cast<double>(num2) / (2.0 * static_cast<double>(npairs));
        if (c_index(s) != brute) {
            o.require(false, "c_index mismatch at rep " + std::to_string(rep));
            break;
        }
    }

    // brier of the constant base-rate predictor is exactly r(1-r)
    const std::vector<double> half(8, 0.5);
    std::vector<bool> half_y(8, false);
    for (int i = 0; i < 4; ++i) half_y[static_cast<std::size_t>(i)] = true;
    o.require(brier(ProbabilitySeries::create(half, half_y)) == 0.25,
              "brier(0.5 constant) != 0.25");
    const std::vector<double> quarter(8, 0.25);
    std::vector<bool> quarter_y(8, false);
    for (int i = 0; i < 2; ++i) quarter_y[static_cast<std::size_t>(i)] = true;
    o.require(brier(ProbabilitySeries::create(quarter, quarter_y)) == 0.25 * 0.75,
              "brier(0.25 constant) != 0.1875");
}

void criterion_7_power(Outcome& o) {
    PowerSpec ps;
    ps.sensitivity = 0.862;
    ps.specificity = 0.935;
    ps.prevalence = 0.233;
    ps.sims = 1000;
    ps.target_halfwidth = 0.07;
    ps.seed = 11;
    ps.n = 400;
    const PowerReport at400 = power_simulation(ps, 2);
    o.require(within(at400.mean_sens_halfwidth, 0.070, 0.005),
              "n=400 half-width " + std::to_string(at400.mean_sens_halfwidth));
    ps.n = 622;
    const PowerReport at622 = power_simulation(ps, 2);
    o.require(within(at622.mean_sens_halfwidth, 0.056, 0.005),
              "n=622 half-width " + std::to_string(at622.mean_sens_halfwidth));
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_8_determinism(Outcome& o) {
    if (g_cli.empty()) {
        o.require(false, "CLI binary path not provided (argv[1])");
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "panelval_acceptance";
    fs::create_directories(dir);
    auto shell = [&](const std::string& args) {
        const std::string cmd =
            "cd " + dir.string() + " && " + g_cli + " " + args + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    // fixtures
    o.require(shell("simulate --prevalence 0.25 --rater 0.95:0.97 --rater 0.9:0.95 "
                    "--rater 0.85:0.93 --n 500 --seed 29 --out panel.csv --probs probs.csv "
                    "--report sim.json"),
              "fixture simulate failed");
    o.require(shell("consensus --annotations panel.csv --export ref.csv --out cons.json"),
              "fixture consensus failed");

    const struct {
        const char* name;
        std::string args;
        const char* artifact;
    } cases[] = {
        {"simulate",
         "simulate --prevalence 0.25 --rater 0.95:0.97 --rater 0.9:0.95 --rater 0.85:0.93 "
         "--n 500 --seed 29 --out det_panel.csv --probs det_probs.csv --report det_sim.json "
         "--threads {T}",
         "det_panel.csv"},
        {"validate",
         "validate --predictions probs.csv --reference ref.csv --boot 2000 --seed 17 "
         "--out det_val.json --threads {T}",
         nullptr},
        {"em",
         "em --annotations panel.csv --predictions probs.csv --boot 400 --seed 23 "
         "--out det_em.json --threads {T}",
         nullptr},
        {"calibrate",
         "calibrate --predictions probs.csv --reference ref.csv --boot 800 --seed 31 "
         "--curve det_curve.csv --out det_cal.json --threads {T}",
         "det_curve.csv"},
        {"power",
         "power --sens 0.862 --spec 0.935 --prevalence 0.233 --n 400 --sims 400 --seed 37 "
         "--target 0.07 --out det_pow.json --threads {T}",
         nullptr},
    };
    for (const auto& c : cases) {
        std::string report_path;
        for (const char* token : {"det_sim.json", "det_val.json", "det_em.json",
                                  "det_cal.json", "det_pow.json"}) {
            if (c.args.find(token) != std::string::npos) report_path = token;
        }
        auto run_with_threads = [&](const char* t) {
            std::string args = c.args;
            const auto at = args.find("{T}");
            args.replace(at, 3, t);
            return shell(args);
        };
        o.require(run_with_threads("1"), std::string(c.name) + " run(threads=1) failed");
        const std::string report_first = slurp(dir / report_path);
        const std::string artifact_first = c.artifact ? slurp(dir / c.artifact) : "";
        o.require(run_with_threads("8"), std::string(c.name) + " run(threads=8) failed");
        o.require(slurp(dir / report_path) == report_first,
                  std::string(c.name) + " report differs across thread counts");
        if (c.artifact) {
            o.require(slurp(dir / c.artifact) == artifact_first,
                      std::string(c.name) + " artifact differs across thread counts");
        }
    }
    fs::remove_all(dir);
}

void criterion_9_life_stage(Outcome& o) {
    struct Case {
        Species species;
        double age;
        LifeStage expected;
    };
    const Case cases[] = {
        // canine bands and all six boundary ages
        {Species::canine, 0.5, LifeStage::juvenile},
        {Species::canine, 1.0, LifeStage::juvenile},
        {Species::canine, 2.0, LifeStage::young_adult},
        {Species::canine, 3.5, LifeStage::young_adult},
        {Species::canine, 4.0, LifeStage::young_adult},
        {Species::canine, 6.0, LifeStage::mature_adult},
        {Species::canine, 7.0, LifeStage::mature_adult},
        {Species::canine, 8.5, LifeStage::senior},
        {Species::canine, 10.0, LifeStage::senior},
        {Species::canine, 10.5, LifeStage::geriatric},
        {Species::canine, 15.0, LifeStage::geriatric},
        // feline bands and all six boundary ages
        {Species::feline, 0.5, LifeStage::juvenile},
        {Species::feline, 1.0, LifeStage::juvenile},
        {Species::feline, 1.7, LifeStage::young_adult},
        {Species::feline, 2.0, LifeStage::young_adult},
        {Species::feline, 4.0, LifeStage::mature_adult},
        {Species::feline, 7.0, LifeStage::mature_adult},
        {Species::feline, 10.0, LifeStage::mature_adult},
        {Species::feline, 12.0, LifeStage::senior},
        {Species::feline, 15.0, LifeStage::senior},
        {Species::feline, 15.5, LifeStage::geriatric},
    };
    for (const auto& c : cases) {
        if (life_stage(c.species, c.age) != c.expected) {
            o.require(false, std::string(to_string(c.species)) + " at " +
                                 std::to_string(c.age) + " misclassified");
        }
    }
    o.require(life_stage(Species::feline, std::nullopt) == LifeStage::unknown,
              "absent age must be unknown");
    o.require(life_stage(Species::canine, std::nullopt) == LifeStage::unknown,
              "absent age must be unknown");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = fs::absolute(argv[1]).string();

    run_criterion(1, "metric reproduction on the published contingency table", 1000,
                  criterion_1_metrics);
    run_criterion(2, "Fleiss kappa 0.909 +/- 0.001 on the validator panel", 10,
                  criterion_2_kappa);
    run_criterion(3, "majority consensus matches all 8 published vote patterns", 1000,
                  criterion_3_consensus);
    run_criterion(4, "2000-replicate bootstrap CIs within 0.02 of the published bounds", 10000,
                  criterion_4_bootstrap);
    run_criterion(5, "EM: monotone, recovers truth, beats grid oracle, covers parameters",
                  120000, criterion_5_em);
    run_criterion(6, "calibration: corrected fit near identity, exact C index and Brier", 30000,
                  criterion_6_calibration);
    run_criterion(7, "power simulation half-widths at n=400 and n=622", 5000,
                  criterion_7_power);
    run_criterion(8, "byte-identical reports at parallelism 1 and 8", 120000,
                  criterion_8_determinism);
    run_criterion(9, "life stages reproduce every published age band", 1000,
                  criterion_9_life_stage);

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    }
    return g_failures;
}
