#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "panelval/consensus.hpp"
#include "panelval/predictions.hpp"

namespace panelval {

struct ContingencyTable {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::int64_t total() const { return tp + fp + fn + tn; }
};

// The eight-metric diagnostic suite. A metric whose denominator is zero
// is carried as an explicit nullopt so degenerate bootstrap replicates
// stay distinguishable from zero.
struct MetricSuite {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> ppv;
    std::optional<double> npv;
    std::optional<double> f1;
    std::optional<double> balanced_accuracy;
    std::optional<double> mcc;
    std::optional<double> jaccard;

    std::optional<double> by_index(std::size_t i) const;
};

inline constexpr std::size_t kMetricCount = 8;
inline constexpr std::array<const char*, kMetricCount> kMetricNames = {
    "sensitivity", "specificity", "ppv", "npv",
    "f1",          "balanced_accuracy", "mcc", "jaccard"};

MetricSuite compute_metrics(const ContingencyTable& c);

// (predicted positive, reference positive) per counted visit.
using OutcomePair = std::pair<bool, bool>;

ContingencyTable contingency_from_pairs(std::span<const OutcomePair> pairs);

struct ContingencyBuild {
    ContingencyTable table;
    std::vector<OutcomePair> pairs;          // units for resampling, visit order
    std::size_t skipped_no_reference = 0;    // prediction without consensus reference
    std::size_t skipped_no_prediction = 0;   // consensus visit without prediction
};

// Joins hard predictions against consensus reference labels under the
// scheme's positive class. Visits missing either side are skipped and
// tallied; an empty join is an error.
ContingencyBuild build_contingency(const PredictionSet& predictions,
                                   const ReferenceLabeling& reference,
                                   const LabelScheme& scheme);

} // namespace panelval
