#include "panelval/latent_class.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "panelval/common.hpp"

namespace panelval {

namespace {

double clamp01(double x) { return std::clamp(x, kParamClamp, 1.0 - kParamClamp); }

// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

} // namespace

VotePatternTable::VotePatternTable(std::vector<std::string> raters, VoteMatrix patterns,
                                   Eigen::VectorXd counts)
    : raters_(std::move(raters)), patterns_(std::move(patterns)), counts_(std::move(counts)) {
    if (patterns_.rows() != counts_.size()) {
        throw InputError("pattern table shape mismatch");
    }
    if (patterns_.cols() != static_cast<Eigen::Index>(raters_.size())) {
        throw InputError("pattern width does not match rater count");
    }
    if (patterns_.rows() == 0) throw InputError("pattern table is empty");
    for (Eigen::Index i = 0; i < counts_.size(); ++i) {
        if (!(counts_[i] >= 1.0) || std::abs(counts_[i] - std::round(counts_[i])) > 1e-9) {
            throw InputError("pattern counts must be positive integers");
        }
    }
    for (Eigen::Index i = 0; i < patterns_.rows(); ++i) {
        for (Eigen::Index j = 0; j < patterns_.cols(); ++j) {
            const std::int8_t v = patterns_(i, j);
            if (v != 0 && v != 1 && v != kMissingLabel) {
                throw InputError("pattern entries must be 1, 0 or missing");
            }
        }
    }
    for (Eigen::Index j = 0; j < patterns_.cols(); ++j) {
        bool any = false;
        for (Eigen::Index i = 0; i < patterns_.rows() && !any; ++i) {
            any = patterns_(i, j) != kMissingLabel;
        }
        if (!any) throw InputError("rater \"" + raters_[static_cast<std::size_t>(j)] +
                                   "\" has no votes in any pattern");
    }
}

VotePatternTable VotePatternTable::from_annotations(const AnnotationTable& table) {
    const LabelCode positive = table.scheme().positive();
    std::map<std::vector<std::int8_t>, double> tally;
    for (std::size_t i = 0; i < table.n_visits(); ++i) {
        std::vector<std::int8_t> row(table.n_raters());
        for (std::size_t j = 0; j < table.n_raters(); ++j) {
            const LabelCode c = table.vote(i, j);
            row[j] = c == kMissingLabel ? kMissingLabel : (c == positive ? 1 : 0);
        }
        tally[row] += 1.0;
    }
    VoteMatrix patterns(static_cast<Eigen::Index>(tally.size()),
                        static_cast<Eigen::Index>(table.n_raters()));
    Eigen::VectorXd counts(static_cast<Eigen::Index>(tally.size()));
    Eigen::Index row = 0;
    for (const auto& [pattern, count] : tally) {
        for (std::size_t j = 0; j < pattern.size(); ++j) {
            patterns(row, static_cast<Eigen::Index>(j)) = pattern[j];
        }
        counts[row] = count;
        ++row;
    }
    return VotePatternTable(table.raters(), std::move(patterns), std::move(counts));
}

AnnotationTable with_algorithm_rater(const AnnotationTable& table,
                                     const PredictionSet& predictions,
                                     const std::string& rater_id) {
    for (const auto& r : table.raters()) {
        if (r == rater_id) throw InputError("rater id already present: " + rater_id);
    }
    std::vector<std::string> raters = table.raters();
    raters.push_back(rater_id);
    VoteMatrix cells(table.cells().rows(), table.cells().cols() + 1);
    cells.leftCols(table.cells().cols()) = table.cells();
    cells.col(cells.cols() - 1).setConstant(kMissingLabel);
    for (const auto& p : predictions) {
        const auto idx = table.visit_index(p.visit_id);
        if (!idx.has_value()) continue;
        cells(static_cast<Eigen::Index>(*idx), cells.cols() - 1) = p.label;
    }
    return AnnotationTable(table.scheme(), table.visit_ids(), std::move(raters),
                           std::move(cells));
}

LatentClassModel LatentClassModel::canonicalized() const {
    if (is_canonical()) return *this;
    LatentClassModel flipped;
    flipped.prevalence = 1.0 - prevalence;
    flipped.se = 1.0 - sp;
    flipped.sp = 1.0 - se;
    return flipped;
}

LatentClassModel LatentClassModel::clamped() const {
    LatentClassModel out;
    out.prevalence = clamp01(prevalence);
    out.se = se.unaryExpr([](double v) { return clamp01(v); });
    out.sp = sp.unaryExpr([](double v) { return clamp01(v); });
    return out;
}

namespace {

void check_model(const LatentClassModel& model, const VotePatternTable& data) {
    if (model.se.size() != static_cast<Eigen::Index>(data.n_raters()) ||
        model.sp.size() != static_cast<Eigen::Index>(data.n_raters())) {
        throw InputError("model rater count does not match data");
    }
}

// Per-pattern class-conditional log-likelihoods: logA under the positive
// class, logB under the negative class. Missing votes contribute factor 1.
void class_log_terms(const LatentClassModel& model, const VotePatternTable& data,
                     Eigen::ArrayXd& log_a, Eigen::ArrayXd& log_b) {
    const auto& patterns = data.patterns();
    const Eigen::Index p = patterns.rows();
    const Eigen::Index r = patterns.cols();
    log_a.setZero(p);
    log_b.setZero(p);
    Eigen::ArrayXd log_se = model.se.log();
    Eigen::ArrayXd log_1mse = (1.0 - model.se).log();
    Eigen::ArrayXd log_sp = model.sp.log();
    Eigen::ArrayXd log_1msp = (1.0 - model.sp).log();
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            const std::int8_t x = patterns(i, j);
            if (x == kMissingLabel) continue;
            if (x == 1) {
                log_a[i] += log_se[j];
                log_b[i] += log_1msp[j];
            } else {
                log_a[i] += log_1mse[j];
                log_b[i] += log_sp[j];
            }
        }
    }
}

struct EStep {
    Eigen::ArrayXd posterior;  // P(class = positive | pattern)
    double loglik = 0.0;
};

EStep e_step(const LatentClassModel& model, const VotePatternTable& data) {
    Eigen::ArrayXd log_a, log_b;
    class_log_terms(model, data, log_a, log_b);
    const double log_pi = std::log(model.prevalence);
    const double log_1mpi = std::log(1.0 - model.prevalence);
    EStep out;
    out.posterior.resize(log_a.size());
    for (Eigen::Index i = 0; i < log_a.size(); ++i) {
        const double pos = log_pi + log_a[i];
        const double neg = log_1mpi + log_b[i];
        const double denom = log_sum_exp(pos, neg);
        out.posterior[i] = std::exp(pos - denom);
        out.loglik += data.counts()[i] * denom;
    }
    return out;
}

LatentClassModel m_step(const Eigen::ArrayXd& posterior, const VotePatternTable& data) {
    const auto& patterns = data.patterns();
    const Eigen::Index p = patterns.rows();
    const Eigen::Index r = patterns.cols();
    const Eigen::ArrayXd counts = data.counts().array();
    LatentClassModel model;
    const double n = counts.sum();
    model.prevalence = clamp01((counts * posterior).sum() / n);
    model.se.resize(r);
    model.sp.resize(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        double w_pos = 0.0, w_pos_hit = 0.0;
        double w_neg = 0.0, w_neg_hit = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            const std::int8_t x = patterns(i, j);
            if (x == kMissingLabel) continue;
            const double c = counts[i];
            const double w = posterior[i];
            w_pos += c * w;
            w_neg += c * (1.0 - w);
            if (x == 1) {
                w_pos_hit += c * w;
            } else {
                w_neg_hit += c * (1.0 - w);
            }
        }
        model.se[j] = clamp01(w_pos > 0.0 ? w_pos_hit / w_pos : 0.5);
        model.sp[j] = clamp01(w_neg > 0.0 ? w_neg_hit / w_neg : 0.5);
    }
    return model;
}

double max_param_delta(const LatentClassModel& a, const LatentClassModel& b) {
    double d = std::abs(a.prevalence - b.prevalence);
    d = std::max(d, (a.se - b.se).abs().maxCoeff());
    d = std::max(d, (a.sp - b.sp).abs().maxCoeff());
    return d;
}

// Majority-vote start: hard posterior 1/0 per pattern, ties at 0.5,
// pushed through one M-step.
LatentClassModel majority_init(const VotePatternTable& data) {
    const auto& patterns = data.patterns();
    Eigen::ArrayXd w(patterns.rows());
    for (Eigen::Index i = 0; i < patterns.rows(); ++i) {
        int pos = 0, neg = 0;
        for (Eigen::Index j = 0; j < patterns.cols(); ++j) {
            if (patterns(i, j) == 1) ++pos;
            else if (patterns(i, j) == 0) ++neg;
        }
        w[i] = pos > neg ? 1.0 : (pos < neg ? 0.0 : 0.5);
    }
    return m_step(w, data);
}

EmFit em_run(const VotePatternTable& data, const LatentClassModel& init,
             const EmOptions& options) {
    EmFit fit;
    fit.model = init.clamped();
    fit.trace.log_likelihoods.reserve(64);
    double prev_loglik = 0.0;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        const EStep e = e_step(fit.model, data);
        fit.trace.log_likelihoods.push_back(e.loglik);
        const LatentClassModel updated = m_step(e.posterior, data);
        const double delta = max_param_delta(fit.model, updated);
        fit.model = updated;
        fit.trace.iterations = iter + 1;
        if (delta < options.param_tol) {
            fit.trace.converged = true;
            fit.trace.stop_reason = EmStop::param_tol;
            break;
        }
        if (iter > 0) {
            const double rel = std::abs(e.loglik - prev_loglik) / (1.0 + std::abs(prev_loglik));
            if (rel < options.loglik_tol) {
                fit.trace.converged = true;
                fit.trace.stop_reason = EmStop::loglik_tol;
                break;
            }
        }
        prev_loglik = e.loglik;
    }
    return fit;
}

} // namespace

double log_likelihood(const LatentClassModel& model, const VotePatternTable& data) {
    check_model(model, data);
    Eigen::ArrayXd log_a, log_b;
    const LatentClassModel m = model.clamped();
    class_log_terms(m, data, log_a, log_b);
    const double log_pi = std::log(m.prevalence);
    const double log_1mpi = std::log(1.0 - m.prevalence);
    double total = 0.0;
    for (Eigen::Index i = 0; i < log_a.size(); ++i) {
        total += data.counts()[i] * log_sum_exp(log_pi + log_a[i], log_1mpi + log_b[i]);
    }
    return total;
}

EmFit em_fit(const VotePatternTable& data, std::optional<LatentClassModel> init,
             const EmOptions& options) {
    const std::size_t r = data.n_raters();
    if (!options.waive_identifiability) {
        // Complete-model identifiability: 2R+1 parameters against 2^R - 1
        // degrees of freedom, which first holds at R = 3.
        const bool identifiable =
            r < 63 && 2 * r + 1 <= (std::uint64_t{1} << r) - 1;
        if (!identifiable) {
            throw InputError("latent-class model with " + std::to_string(r) +
                             " raters is not identifiable; use >= 3 raters or waive the check");
        }
    }
    if (init.has_value()) check_model(*init, data);

    EmFit best = em_run(data, init.value_or(majority_init(data)), options);
    double best_ll = log_likelihood(best.model, data);
    RandomStream restarts(stream_seed(options.restart_seed, 0x6C63656D72737472ULL));
    for (std::size_t k = 0; k < options.random_restarts; ++k) {
        LatentClassModel start;
        start.prevalence = 0.1 + 0.8 * restarts.uniform();
        start.se.resize(static_cast<Eigen::Index>(r));
        start.sp.resize(static_cast<Eigen::Index>(r));
        for (std::size_t j = 0; j < r; ++j) {
            start.se[static_cast<Eigen::Index>(j)] = 0.5 + 0.49 * restarts.uniform();
            start.sp[static_cast<Eigen::Index>(j)] = 0.5 + 0.49 * restarts.uniform();
        }
        EmFit candidate = em_run(data, start, options);
        const double candidate_ll = log_likelihood(candidate.model, data);
        if (candidate_ll > best_ll) {
            best = std::move(candidate);
            best_ll = candidate_ll;
        }
    }
    best.model = best.model.canonicalized();
    return best;
}

EmBootstrapResult em_bootstrap_ci(const VotePatternTable& data, const BootstrapSpec& spec,
                                  const EmOptions& options, unsigned threads) {
    EmBootstrapResult result;
    result.fit = em_fit(data, std::nullopt, options);

    // Pattern-expanded units so visits resample uniformly.
    std::vector<std::uint32_t> units;
    units.reserve(static_cast<std::size_t>(data.total()));
    for (std::size_t i = 0; i < data.n_patterns(); ++i) {
        const auto c = static_cast<std::size_t>(std::llround(data.counts()[static_cast<Eigen::Index>(i)]));
        units.insert(units.end(), c, static_cast<std::uint32_t>(i));
    }

    const std::size_t n_params = 1 + 2 * data.n_raters();
    std::vector<std::optional<double>> replicate_params(spec.replicates * n_params);
    EmOptions replicate_options = options;
    replicate_options.random_restarts = 0;

    detail::parallel_replicates(spec.replicates, threads, [&](std::size_t rep) {
        RandomStream rs = RandomStream::for_stream(spec.seed, rep);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n_patterns()));
        for (std::size_t i = 0; i < units.size(); ++i) {
            counts[units[rs.uniform_index(units.size())]] += 1.0;
        }
        std::vector<Eigen::Index> kept;
        for (Eigen::Index i = 0; i < counts.size(); ++i) {
            if (counts[i] > 0.0) kept.push_back(i);
        }
        VoteMatrix patterns(static_cast<Eigen::Index>(kept.size()), data.patterns().cols());
        Eigen::VectorXd kept_counts(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            patterns.row(static_cast<Eigen::Index>(i)) = data.patterns().row(kept[i]);
            kept_counts[static_cast<Eigen::Index>(i)] = counts[kept[i]];
        }
        try {
            const VotePatternTable resampled(data.raters(), std::move(patterns),
                                             std::move(kept_counts));
            const EmFit fit = em_fit(resampled, result.fit.model, replicate_options);
            if (!fit.trace.converged) return;  // slot stays undefined
            const LatentClassModel m = fit.model.canonicalized();
            auto* slot = replicate_params.data() + rep * n_params;
            slot[0] = m.prevalence;
            for (std::size_t j = 0; j < data.n_raters(); ++j) {
                slot[1 + j] = m.se[static_cast<Eigen::Index>(j)];
                slot[1 + data.n_raters() + j] = m.sp[static_cast<Eigen::Index>(j)];
            }
        } catch (const InputError&) {
            // Degenerate resample (e.g. a rater lost every vote): failed replicate.
        }
    });

    for (std::size_t rep = 0; rep < spec.replicates; ++rep) {
        if (!replicate_params[rep * n_params].has_value()) result.failed_replicates += 1;
    }
    if (static_cast<double>(result.failed_replicates) >
        0.01 * static_cast<double>(spec.replicates)) {
        throw NumericalError("em_bootstrap_ci: replicate failures exceed the 1% budget (" +
                             std::to_string(result.failed_replicates) + " of " +
                             std::to_string(spec.replicates) + ")");
    }

    auto param_interval = [&](std::size_t param_idx, double estimate) {
        std::vector<std::optional<double>> column(spec.replicates);
        for (std::size_t rep = 0; rep < spec.replicates; ++rep) {
            column[rep] = replicate_params[rep * n_params + param_idx];
        }
        return detail::summarize_replicates(estimate, column, spec.confidence);
    };
    const LatentClassModel& full = result.fit.model;
    result.prevalence = param_interval(0, full.prevalence);
    for (std::size_t j = 0; j < data.n_raters(); ++j) {
        result.se.push_back(param_interval(1 + j, full.se[static_cast<Eigen::Index>(j)]));
        result.sp.push_back(
            param_interval(1 + data.n_raters() + j, full.sp[static_cast<Eigen::Index>(j)]));
    }
    return result;
}

} // namespace panelval
