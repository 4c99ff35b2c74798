#pragma once

#include <Eigen/Core>
#include <vector>

#include "panelval/consensus.hpp"
#include "panelval/predictions.hpp"
#include "panelval/resampling.hpp"

namespace panelval {

inline constexpr double kProbClamp = 1e-6;

double expit(double x);
// Logit of p clamped to [kProbClamp, 1 - kProbClamp] so boundary
// probabilities keep finite logits.
double clamped_logit(double p);

// Paired predicted probabilities and binary outcomes.
struct ProbabilitySeries {
    Eigen::ArrayXd p;
    Eigen::Array<bool, Eigen::Dynamic, 1> y;

    static ProbabilitySeries create(std::vector<double> probabilities,
                                    std::vector<bool> outcomes);
    std::size_t size() const { return static_cast<std::size_t>(p.size()); }
};

// Joins prediction probabilities against consensus reference labels;
// visits lacking a probability or a consensus are skipped.
ProbabilitySeries series_from_predictions(const PredictionSet& predictions,
                                          const ReferenceLabeling& reference,
                                          const LabelScheme& scheme);

// Mean squared difference between probability and outcome.
double brier(const ProbabilitySeries& series);

// Concordance over (positive, negative) pairs, ties scoring one half.
// Exact integer pair counting; O(n log n).
double c_index(const ProbabilitySeries& series);

// Two-parameter logistic recalibration of outcomes on logit(p); (0, 1) is
// perfect calibration.
struct RecalibrationFit {
    double intercept = 0.0;
    double slope = 1.0;
    std::size_t iterations = 0;
};

RecalibrationFit fit_recalibration(const ProbabilitySeries& series);

struct CurvePoint {
    double predicted = 0.0;
    double apparent = 0.0;
    double bias_corrected = 0.0;
};

struct CalibrationReport {
    double brier = 0.0;
    double c_index = 0.0;
    RecalibrationFit apparent;
    double corrected_intercept = 0.0;
    double corrected_slope = 0.0;
    double emax = 0.0;             // max |predicted - bias_corrected| over the grid
    double mean_abs_error = 0.0;   // mean |p_i - bias_corrected(p_i)| over observations
    std::vector<CurvePoint> curve; // grid over the observed probability range
    std::size_t replicates = 0;
    std::size_t failed_replicates = 0;
};

struct CalibrationOptions {
    std::size_t grid_size = 100;
    // When false every "replicate" is the full dataset; the bias-corrected
    // curve then collapses onto the apparent curve (test mode).
    bool resample = true;
};

// Bootstrap bias-corrected calibration: apparent fit on the full data,
// refits on resamples, curve and coefficients corrected by
// 2*apparent - mean(replicate).
CalibrationReport bias_corrected_calibration(const ProbabilitySeries& series,
                                             const BootstrapSpec& spec,
                                             const CalibrationOptions& options = {},
                                             unsigned threads = 1);

} // namespace panelval
