#include "panelval/resampling.hpp"

#include <cmath>

namespace panelval {

double quantile_sorted(std::span<const double> sorted_values, double q) {
    if (sorted_values.empty()) throw InputError("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile: q must lie in [0,1]");
    const std::size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    const double h = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted_values[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal_quantile: p must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    constexpr double p_high = 1.0 - p_low;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= p_high) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley refinement brings the approximation to full precision.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

namespace detail {

IntervalEstimate summarize_replicates(double estimate,
                                      std::span<const std::optional<double>> replicate_values,
                                      double confidence) {
    std::vector<double> valid;
    valid.reserve(replicate_values.size());
    for (const auto& v : replicate_values) {
        if (v.has_value()) valid.push_back(*v);
    }
    IntervalEstimate out;
    out.estimate = estimate;
    out.n_valid_replicates = valid.size();
    out.n_undefined_replicates = replicate_values.size() - valid.size();
    if (valid.empty()) {
        throw NumericalError("bootstrap: statistic undefined on every replicate");
    }
    std::sort(valid.begin(), valid.end());
    const double alpha = (1.0 - confidence) / 2.0;
    out.lower = quantile_sorted(valid, alpha);
    out.upper = quantile_sorted(valid, 1.0 - alpha);
    return out;
}

} // namespace detail

namespace {

struct StudyOutcome {
    bool defined = false;
    double sens_halfwidth = 0.0;
    double spec_halfwidth = 0.0;
};

} // namespace

PowerReport power_simulation(const PowerSpec& spec, unsigned threads) {
    if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0)) {
        throw InputError("power_simulation: degenerate prevalence");
    }
    if (!(spec.sensitivity >= 0.0 && spec.sensitivity <= 1.0) ||
        !(spec.specificity >= 0.0 && spec.specificity <= 1.0)) {
        throw InputError("power_simulation: sensitivity/specificity must lie in [0,1]");
    }
    if (spec.n < 1 || spec.sims < 1) throw InputError("power_simulation: n and sims must be >= 1");
    if (!(spec.confidence > 0.0 && spec.confidence < 1.0)) {
        throw InputError("power_simulation: confidence must lie in (0,1)");
    }

    const double z = normal_quantile(0.5 + spec.confidence / 2.0);
    // Domain-separated sub-streams: one root for study data, one for the
    // bootstrap inside each study.
    const std::uint64_t data_root = stream_seed(spec.seed, 0x706F7765722D6461ULL);
    const std::uint64_t boot_root = stream_seed(spec.seed, 0x706F7765722D6273ULL);

    std::vector<StudyOutcome> outcomes(spec.sims);
    detail::parallel_replicates(spec.sims, threads, [&](std::size_t s) {
        RandomStream rs = RandomStream::for_stream(data_root, s);
        std::vector<std::pair<bool, bool>> subjects;  // (truth, predicted)
        subjects.reserve(spec.n);
        std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            const bool truth = rs.bernoulli(spec.prevalence);
            const bool pred = truth ? rs.bernoulli(spec.sensitivity)
                                    : !rs.bernoulli(spec.specificity);
            subjects.emplace_back(truth, pred);
            if (truth) {
                (pred ? tp : fn) += 1;
            } else {
                (pred ? fp : tn) += 1;
            }
        }
        const std::size_t n_pos = tp + fn;
        const std::size_t n_neg = tn + fp;
        if (n_pos == 0 || n_neg == 0) return;  // sensitivity or specificity undefined

        StudyOutcome& o = outcomes[s];
        if (spec.method == PowerMethod::wald) {
            const double se_hat = static_cast<double>(tp) / static_cast<double>(n_pos);
            const double sp_hat = static_cast<double>(tn) / static_cast<double>(n_neg);
            o.sens_halfwidth = z * std::sqrt(se_hat * (1.0 - se_hat) / static_cast<double>(n_pos));
            o.spec_halfwidth = z * std::sqrt(sp_hat * (1.0 - sp_hat) / static_cast<double>(n_neg));
        } else {
            BootstrapSpec bs;
            bs.replicates = spec.bootstrap_replicates;
            bs.seed = stream_seed(boot_root, s);
            bs.confidence = spec.confidence;
            auto sens_stat = [](std::span<const std::pair<bool, bool>> xs) -> std::optional<double> {
                std::size_t hit = 0, pos = 0;
                for (const auto& [truth, pred] : xs) {
                    if (truth) {
                        ++pos;
                        if (pred) ++hit;
                    }
                }
                if (pos == 0) return std::nullopt;
                return static_cast<double>(hit) / static_cast<double>(pos);
            };
            auto spec_stat = [](std::span<const std::pair<bool, bool>> xs) -> std::optional<double> {
                std::size_t hit = 0, neg = 0;
                for (const auto& [truth, pred] : xs) {
                    if (!truth) {
                        ++neg;
                        if (!pred) ++hit;
                    }
                }
                if (neg == 0) return std::nullopt;
                return static_cast<double>(hit) / static_cast<double>(neg);
            };
            try {
                const IntervalEstimate se_ci =
                    bootstrap_ci(std::span<const std::pair<bool, bool>>(subjects), sens_stat, bs);
                const IntervalEstimate sp_ci =
                    bootstrap_ci(std::span<const std::pair<bool, bool>>(subjects), spec_stat, bs);
                o.sens_halfwidth = (se_ci.upper - se_ci.lower) / 2.0;
                o.spec_halfwidth = (sp_ci.upper - sp_ci.lower) / 2.0;
            } catch (const NumericalError&) {
                return;  // all replicates degenerate; study stays undefined
            }
        }
        o.defined = true;
    });

    PowerReport report;
    report.sims = spec.sims;
    std::size_t adequate = 0, sens_ok = 0, spec_ok = 0;
    for (const auto& o : outcomes) {
        if (!o.defined) {
            report.n_undefined += 1;
            continue;
        }
        report.n_defined += 1;
        report.mean_sens_halfwidth += o.sens_halfwidth;
        report.mean_spec_halfwidth += o.spec_halfwidth;
        const bool s_ok = o.sens_halfwidth <= spec.target_halfwidth;
        const bool p_ok = o.spec_halfwidth <= spec.target_halfwidth;
        if (s_ok) ++sens_ok;
        if (p_ok) ++spec_ok;
        if (s_ok && p_ok) ++adequate;
    }
    if (report.n_defined == 0) {
        throw NumericalError("power_simulation: every simulated study was degenerate");
    }
    const double denom = static_cast<double>(report.n_defined);
    report.mean_sens_halfwidth /= denom;
    report.mean_spec_halfwidth /= denom;
    report.fraction_adequate = static_cast<double>(adequate) / denom;
    report.fraction_sens_adequate = static_cast<double>(sens_ok) / denom;
    report.fraction_spec_adequate = static_cast<double>(spec_ok) / denom;
    return report;
}

} // namespace panelval
