#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "panelval/common.hpp"
#include "panelval/rng.hpp"

namespace panelval {

struct BootstrapSpec {
    std::size_t replicates = 2000;
    std::uint64_t seed = 0;
    double confidence = 0.95;
};

struct IntervalEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t n_valid_replicates = 0;
    std::size_t n_undefined_replicates = 0;
};

// Empirical quantile with linear interpolation between closest order
// statistics (the R type-7 rule): h = (n-1)q, interpolate x[floor(h)]
// and x[floor(h)+1]. Fixed across the whole artifact.
double quantile_sorted(std::span<const double> sorted_values, double q);
double quantile(std::vector<double> values, double q);

// Inverse standard normal CDF (Acklam's rational approximation plus one
// Halley refinement).
double normal_quantile(double p);

namespace detail {

// Runs fn(r) for every replicate index r in [0, count). Work is chunked
// across threads; fn must write only to its own replicate's slot.
template <class Fn>
void parallel_replicates(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t r = 0; r < count; ++r) fn(r);
        return;
    }
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < count; r += workers) fn(r);
        });
    }
    for (auto& t : pool) t.join();
}

IntervalEstimate summarize_replicates(double estimate,
                                      std::span<const std::optional<double>> replicate_values,
                                      double confidence);

} // namespace detail

// Draws a full-size resample with replacement using the replicate's own
// stream; deterministic in (seed, replicate) regardless of thread count.
template <class Unit>
std::vector<Unit> resample_with_replacement(std::span<const Unit> units, RandomStream& rs) {
    std::vector<Unit> out;
    out.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        out.push_back(units[rs.uniform_index(units.size())]);
    }
    return out;
}

// Evaluates `arity` statistics on each of spec.replicates resamples.
// MultiStat: (span<const Unit> resample, span<optional<double>> out).
// Returns a replicates x arity matrix in row-major replicate order.
template <class Unit, class MultiStat>
std::vector<std::optional<double>> bootstrap_replicates(std::span<const Unit> units,
                                                        std::size_t arity, MultiStat&& stat,
                                                        const BootstrapSpec& spec,
                                                        unsigned threads = 1) {
    if (units.empty()) throw InputError("bootstrap: empty dataset");
    if (spec.replicates < 1) throw InputError("bootstrap: replicates must be >= 1");
    if (!(spec.confidence > 0.0 && spec.confidence < 1.0)) {
        throw InputError("bootstrap: confidence must lie in (0,1)");
    }
    std::vector<std::optional<double>> results(spec.replicates * arity);
    detail::parallel_replicates(spec.replicates, threads, [&](std::size_t r) {
        RandomStream rs = RandomStream::for_stream(spec.seed, r);
        const std::vector<Unit> resample = resample_with_replacement(units, rs);
        stat(std::span<const Unit>(resample), std::span<std::optional<double>>(
                                                  results.data() + r * arity, arity));
    });
    return results;
}

// Percentile bootstrap interval of a single statistic. The statistic may
// return nullopt on degenerate resamples; those replicates are dropped
// and counted, never imputed.
template <class Unit, class Stat>
IntervalEstimate bootstrap_ci(std::span<const Unit> units, Stat&& statistic,
                              const BootstrapSpec& spec, unsigned threads = 1) {
    if (units.empty()) throw InputError("bootstrap: empty dataset");
    const std::optional<double> full = statistic(units);
    if (!full.has_value()) {
        throw InputError("bootstrap: statistic undefined on the full dataset");
    }
    auto results = bootstrap_replicates(
        units, 1,
        [&](std::span<const Unit> resample, std::span<std::optional<double>> out) {
            out[0] = statistic(resample);
        },
        spec, threads);
    return detail::summarize_replicates(*full, results, spec.confidence);
}

enum class PowerMethod { wald, bootstrap };

struct PowerSpec {
    double sensitivity = 0.9;
    double specificity = 0.9;
    double prevalence = 0.5;
    std::size_t n = 400;
    std::size_t sims = 1000;
    double target_halfwidth = 0.07;
    double confidence = 0.95;
    PowerMethod method = PowerMethod::wald;
    std::size_t bootstrap_replicates = 2000;
    std::uint64_t seed = 0;
};

struct PowerReport {
    double mean_sens_halfwidth = 0.0;
    double mean_spec_halfwidth = 0.0;
    double fraction_adequate = 0.0;       // both half-widths <= target
    double fraction_sens_adequate = 0.0;
    double fraction_spec_adequate = 0.0;
    std::size_t n_defined = 0;
    std::size_t n_undefined = 0;
    std::size_t sims = 0;
};

// Parametric sample-size check: simulates `sims` studies of size n under
// the binomial truth/error model and summarizes CI half-widths for
// sensitivity and specificity.
PowerReport power_simulation(const PowerSpec& spec, unsigned threads = 1);

} // namespace panelval
