#include "panelval/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "panelval/common.hpp"

namespace panelval {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamped_logit(double p) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return std::log(q / (1.0 - q));
}

ProbabilitySeries ProbabilitySeries::create(std::vector<double> probabilities,
                                            std::vector<bool> outcomes) {
    if (probabilities.empty()) throw InputError("probability series is empty");
    if (probabilities.size() != outcomes.size()) {
        throw InputError("probability series length mismatch");
    }
    ProbabilitySeries s;
    s.p.resize(static_cast<Eigen::Index>(probabilities.size()));
    s.y.resize(static_cast<Eigen::Index>(outcomes.size()));
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (!(probabilities[i] >= 0.0 && probabilities[i] <= 1.0)) {
            throw InputError("probability outside [0,1]");
        }
        s.p[static_cast<Eigen::Index>(i)] = probabilities[i];
        s.y[static_cast<Eigen::Index>(i)] = outcomes[i];
    }
    return s;
}

ProbabilitySeries series_from_predictions(const PredictionSet& predictions,
                                          const ReferenceLabeling& reference,
                                          const LabelScheme& scheme) {
    std::vector<double> p;
    std::vector<bool> y;
    for (const auto& pred : predictions) {
        if (!pred.probability.has_value()) continue;
        const auto idx = reference.visit_index(pred.visit_id);
        if (!idx.has_value()) continue;
        const auto& ref = reference.visits()[*idx];
        if (!ref.label.has_value()) continue;
        p.push_back(*pred.probability);
        y.push_back(scheme.is_positive(*ref.label));
    }
    if (p.empty()) {
        throw InputError("no visit has both a probability and a consensus reference");
    }
    return ProbabilitySeries::create(std::move(p), std::move(y));
}

double brier(const ProbabilitySeries& series) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < series.p.size(); ++i) {
        const double d = series.p[i] - (series.y[i] ? 1.0 : 0.0);
        sum += d * d;
    }
    return sum / static_cast<double>(series.p.size());
}

double c_index(const ProbabilitySeries& series) {
    const Eigen::Index n = series.p.size();
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return series.p[static_cast<Eigen::Index>(a)] < series.p[static_cast<Eigen::Index>(b)];
    });
    std::uint64_t concordant2 = 0;  // twice the concordance score, exact
    std::uint64_t negatives_below = 0;
    std::uint64_t total_pos = 0, total_neg = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t pos_here = 0, neg_here = 0;
        const double value = series.p[static_cast<Eigen::Index>(order[i])];
        while (j < order.size() && series.p[static_cast<Eigen::Index>(order[j])] == value) {
            if (series.y[static_cast<Eigen::Index>(order[j])]) ++pos_here;
            else ++neg_here;
            ++j;
        }
        concordant2 += 2 * pos_here * negatives_below;  // strictly lower negatives
        concordant2 += pos_here * neg_here;             // ties count half
        negatives_below += neg_here;
        total_pos += pos_here;
        total_neg += neg_here;
        i = j;
    }
    if (total_pos == 0 || total_neg == 0) {
        throw InputError("c_index: needs both outcome classes");
    }
    return static_cast<double>(concordant2) / (2.0 * static_cast<double>(total_pos) *
                                               static_cast<double>(total_neg));
}

namespace {

double logistic_loglik(const Eigen::ArrayXd& x, const Eigen::Array<bool, Eigen::Dynamic, 1>& y,
                       double a, double b) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double eta = a + b * x[i];
        // log sigma(eta) = -log1p(exp(-eta)); stable both directions
        ll += y[i] ? -std::log1p(std::exp(-eta)) : -std::log1p(std::exp(eta));
    }
    return ll;
}

void check_two_classes(const ProbabilitySeries& series) {
    bool any_pos = false, any_neg = false;
    for (Eigen::Index i = 0; i < series.y.size(); ++i) {
        (series.y[i] ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg) {
        throw InputError("recalibration: needs both outcome classes");
    }
}

RecalibrationFit fit_logistic(const Eigen::ArrayXd& x,
                              const Eigen::Array<bool, Eigen::Dynamic, 1>& y) {
    const Eigen::Index n = x.size();

    // Complete separation on a single covariate shows up as disjoint
    // class-conditional ranges: the MLE diverges, so fail explicitly.
    double pos_min = 1e300, pos_max = -1e300, neg_min = 1e300, neg_max = -1e300;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i]) {
            pos_min = std::min(pos_min, x[i]);
            pos_max = std::max(pos_max, x[i]);
        } else {
            neg_min = std::min(neg_min, x[i]);
            neg_max = std::max(neg_max, x[i]);
        }
    }
    if (neg_max < pos_min || pos_max < neg_min) {
        throw NumericalError("recalibration: complete separation");
    }
    const double spread = x.maxCoeff() - x.minCoeff();
    if (spread < 1e-12) {
        throw NumericalError("recalibration: predictor has no variation, slope unidentifiable");
    }

    // Newton-Raphson with step halving on the concave log-likelihood.
    double ybar = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ybar += y[i] ? 1.0 : 0.0;
    ybar /= static_cast<double>(n);
    double a = clamped_logit(ybar);
    double b = 0.0;
    double ll = logistic_loglik(x, y, a, b);
    RecalibrationFit fit;
    constexpr std::size_t kMaxIter = 100;
    for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = expit(a + b * x[i]);
            const double resid = (y[i] ? 1.0 : 0.0) - mu;
            const double w = mu * (1.0 - mu);
            grad[0] += resid;
            grad[1] += resid * x[i];
            hess(0, 0) += w;
            hess(0, 1) += w * x[i];
            hess(1, 1) += w * x[i] * x[i];
        }
        hess(1, 0) = hess(0, 1);
        if (grad.lpNorm<Eigen::Infinity>() < 1e-10 * static_cast<double>(n)) {
            fit.intercept = a;
            fit.slope = b;
            fit.iterations = iter;
            return fit;
        }
        const Eigen::Vector2d step = hess.ldlt().solve(grad);
        if (!step.allFinite()) {
            throw NumericalError("recalibration: singular information matrix");
        }
        double scale = 1.0;
        double new_a = a, new_b = b, new_ll = ll;
        for (int half = 0; half < 40; ++half) {
            new_a = a + scale * step[0];
            new_b = b + scale * step[1];
            new_ll = logistic_loglik(x, y, new_a, new_b);
            if (new_ll >= ll - 1e-12) break;
            scale /= 2.0;
        }
        const bool stalled = std::abs(new_a - a) < 1e-12 && std::abs(new_b - b) < 1e-12;
        a = new_a;
        b = new_b;
        ll = new_ll;
        if (std::abs(a) > 50.0 || std::abs(b) > 50.0) {
            throw NumericalError("recalibration: diverging coefficients (quasi-separation)");
        }
        if (stalled) {
            fit.intercept = a;
            fit.slope = b;
            fit.iterations = iter + 1;
            return fit;
        }
    }
    throw NumericalError("recalibration: Newton iterations did not converge");
}

} // namespace

RecalibrationFit fit_recalibration(const ProbabilitySeries& series) {
    check_two_classes(series);
    Eigen::ArrayXd x(series.p.size());
    for (Eigen::Index i = 0; i < series.p.size(); ++i) x[i] = clamped_logit(series.p[i]);
    return fit_logistic(x, series.y);
}

CalibrationReport bias_corrected_calibration(const ProbabilitySeries& series,
                                             const BootstrapSpec& spec,
                                             const CalibrationOptions& options,
                                             unsigned threads) {
    if (options.grid_size < 2) throw InputError("calibration grid needs >= 2 points");
    if (spec.replicates < 1) throw InputError("calibration needs >= 1 replicate");

    CalibrationReport report;
    report.brier = brier(series);
    report.c_index = c_index(series);
    report.apparent = fit_recalibration(series);
    report.replicates = spec.replicates;

    const Eigen::Index n = series.p.size();
    const double p_min = series.p.minCoeff();
    const double p_max = series.p.maxCoeff();

    // Replicate refits; failures are tolerated up to 1% of the budget.
    std::vector<std::optional<std::pair<double, double>>> fits(spec.replicates);
    detail::parallel_replicates(spec.replicates, threads, [&](std::size_t rep) {
        ProbabilitySeries resample;
        if (options.resample) {
            RandomStream rs = RandomStream::for_stream(spec.seed, rep);
            resample.p.resize(n);
            resample.y.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto k = static_cast<Eigen::Index>(
                    rs.uniform_index(static_cast<std::size_t>(n)));
                resample.p[i] = series.p[k];
                resample.y[i] = series.y[k];
            }
        } else {
            resample = series;
        }
        try {
            const RecalibrationFit fit = fit_recalibration(resample);
            fits[rep] = std::make_pair(fit.intercept, fit.slope);
        } catch (const InputError&) {
        } catch (const NumericalError&) {
        }
    });

    std::vector<std::pair<double, double>> ok;
    ok.reserve(spec.replicates);
    for (const auto& f : fits) {
        if (f.has_value()) ok.push_back(*f);
    }
    report.failed_replicates = spec.replicates - ok.size();
    if (static_cast<double>(report.failed_replicates) >
        0.01 * static_cast<double>(spec.replicates)) {
        throw NumericalError("calibration: replicate fit failures exceed the 1% budget (" +
                             std::to_string(report.failed_replicates) + " of " +
                             std::to_string(spec.replicates) + ")");
    }

    const double n_ok = static_cast<double>(ok.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (const auto& [ra, rb] : ok) {
        mean_a += ra;
        mean_b += rb;
    }
    mean_a /= n_ok;
    mean_b /= n_ok;
    report.corrected_intercept = 2.0 * report.apparent.intercept - mean_a;
    report.corrected_slope = 2.0 * report.apparent.slope - mean_b;

    // Bias-corrected value of the calibration curve at probability t.
    auto corrected_at = [&](double t) {
        const double lt = clamped_logit(t);
        const double apparent = expit(report.apparent.intercept + report.apparent.slope * lt);
        double mean_curve = 0.0;
        for (const auto& [ra, rb] : ok) mean_curve += expit(ra + rb * lt);
        mean_curve /= n_ok;
        return std::make_pair(apparent, 2.0 * apparent - mean_curve);
    };

    report.curve.reserve(options.grid_size);
    report.emax = 0.0;
    for (std::size_t g = 0; g < options.grid_size; ++g) {
        CurvePoint pt;
        pt.predicted = g + 1 == options.grid_size
                           ? p_max
                           : p_min + (p_max - p_min) * static_cast<double>(g) /
                                         static_cast<double>(options.grid_size - 1);
        const auto [apparent, corrected] = corrected_at(pt.predicted);
        pt.apparent = apparent;
        pt.bias_corrected = corrected;
        report.emax = std::max(report.emax, std::abs(pt.predicted - pt.bias_corrected));
        report.curve.push_back(pt);
    }

    double mae = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        mae += std::abs(series.p[i] - corrected_at(series.p[i]).second);
    }
    report.mean_abs_error = mae / static_cast<double>(n);
    return report;
}

} // namespace panelval
