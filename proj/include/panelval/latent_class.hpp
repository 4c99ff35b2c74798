#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "panelval/annotations.hpp"
#include "panelval/predictions.hpp"
#include "panelval/resampling.hpp"

namespace panelval {

// Distinct response vectors over {positive=1, negative=0, missing=-1}
// with multiplicities. The compact input to the latent-class fit.
class VotePatternTable {
public:
    VotePatternTable(std::vector<std::string> raters, VoteMatrix patterns,
                     Eigen::VectorXd counts);

    // Binarizes a panel against its scheme's positive class and collapses
    // identical response vectors.
    static VotePatternTable from_annotations(const AnnotationTable& table);

    const std::vector<std::string>& raters() const { return raters_; }
    const VoteMatrix& patterns() const { return patterns_; }
    const Eigen::VectorXd& counts() const { return counts_; }
    std::size_t n_raters() const { return raters_.size(); }
    std::size_t n_patterns() const { return static_cast<std::size_t>(patterns_.rows()); }
    double total() const { return counts_.sum(); }

private:
    std::vector<std::string> raters_;
    VoteMatrix patterns_;
    Eigen::VectorXd counts_;
};

// Adds the classifier as one more rater column; panel visits without a
// prediction get a missing vote, predictions for unknown visits are
// ignored.
AnnotationTable with_algorithm_rater(const AnnotationTable& table,
                                     const PredictionSet& predictions,
                                     const std::string& rater_id = "algorithm");

inline constexpr double kParamClamp = 1e-6;

// Conditional-independence latent-class parameters: class prevalence and
// per-rater sensitivity/specificity, all clamped inside (0,1).
struct LatentClassModel {
    double prevalence = 0.5;
    Eigen::ArrayXd se;
    Eigen::ArrayXd sp;

    // Label switching resolved by requiring mean(se + sp) >= 1.
    bool is_canonical() const { return (se + sp).mean() >= 1.0; }
    LatentClassModel canonicalized() const;
    LatentClassModel clamped() const;
};

enum class EmStop { param_tol, loglik_tol, max_iter };

struct EmTrace {
    std::size_t iterations = 0;
    std::vector<double> log_likelihoods;
    bool converged = false;
    EmStop stop_reason = EmStop::max_iter;
};

struct EmOptions {
    std::size_t max_iterations = 10000;
    double param_tol = 1e-8;
    double loglik_tol = 1e-10;        // relative log-likelihood change
    std::size_t random_restarts = 5;  // extra seeded starts, best kept
    std::uint64_t restart_seed = 0;
    bool waive_identifiability = false;
};

double log_likelihood(const LatentClassModel& model, const VotePatternTable& data);

struct EmFit {
    LatentClassModel model;
    EmTrace trace;
};

// EM for the two-class conditional-independence model. Default start is
// the majority-vote labeling; finishes canonicalized.
EmFit em_fit(const VotePatternTable& data, std::optional<LatentClassModel> init = std::nullopt,
             const EmOptions& options = {});

struct EmBootstrapResult {
    EmFit fit;  // full-data fit
    IntervalEstimate prevalence;
    std::vector<IntervalEstimate> se;
    std::vector<IntervalEstimate> sp;
    std::size_t failed_replicates = 0;
};

// Percentile intervals from refits on pattern-expanded visit resamples,
// each warm-started at the full-data fit. Replicate failures above 1% of
// the budget abort the run.
EmBootstrapResult em_bootstrap_ci(const VotePatternTable& data, const BootstrapSpec& spec,
                                  const EmOptions& options = {}, unsigned threads = 1);

} // namespace panelval
