#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "panelval/annotations.hpp"

namespace panelval {

struct VisitReference {
    std::optional<LabelCode> label;  // absent when no strict majority
    std::vector<std::size_t> vote_counts;  // per scheme class
    bool unanimous = false;
};

// Per-visit consensus labels with vote tallies. Built by majority vote or
// parsed from a reference CSV.
class ReferenceLabeling {
public:
    ReferenceLabeling(LabelScheme scheme, std::vector<std::string> visit_ids,
                      std::vector<VisitReference> visits);

    const LabelScheme& scheme() const { return scheme_; }
    const std::vector<std::string>& visit_ids() const { return visit_ids_; }
    const std::vector<VisitReference>& visits() const { return visits_; }
    std::size_t n_visits() const { return visit_ids_.size(); }

    std::optional<std::size_t> visit_index(std::string_view visit_id) const;
    std::size_t n_consensus() const;
    std::size_t n_unanimous() const;
    std::size_t count_with_label(LabelCode code) const;

private:
    LabelScheme scheme_;
    std::vector<std::string> visit_ids_;
    std::vector<VisitReference> visits_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Strict-majority consensus over present votes; exact ties yield no
// reference label and are surfaced, never guessed.
ReferenceLabeling majority_reference(const AnnotationTable& table);

struct ExactMatchResult {
    double rate = 0.0;
    std::size_t unanimous_visits = 0;
    std::size_t fully_annotated_visits = 0;
    std::size_t excluded_incomplete = 0;
};

// Fraction of fully-annotated visits on which every rater chose the same
// label. Requires >= 2 raters and at least one fully-annotated visit.
ExactMatchResult exact_match_rate(const AnnotationTable& table);

enum class KappaStatus { ok, undefined_single_category };

struct KappaResult {
    std::optional<double> kappa;  // absent when chance agreement is 1
    KappaStatus status = KappaStatus::ok;
    std::size_t included_visits = 0;
    std::size_t excluded_visits = 0;
};

// Fleiss' kappa over visits with a full set of k = n_raters votes; visits
// with missing votes are excluded and counted. Degenerate single-category
// panels report an explicit undefined status, not 0.
KappaResult fleiss_kappa(const AnnotationTable& table);

struct RaterMatchRate {
    std::string rater;
    double rate = 0.0;
    std::size_t matched = 0;
    std::size_t countable = 0;
};

// Per-rater fraction of present votes equal to the visit's reference
// label; visits without consensus are excluded. A rater with no countable
// votes is an error.
std::vector<RaterMatchRate> rater_match_rates(const AnnotationTable& table,
                                              const ReferenceLabeling& reference);

// Pass/fail against the pre-hoc agreement benchmark (inclusive).
bool qualification_gate(double rate, double threshold = 0.85);

struct AgreementReport {
    std::size_t n_visits = 0;
    ExactMatchResult exact_match;
    KappaResult kappa;
    std::vector<RaterMatchRate> per_rater_match;
    std::size_t no_consensus_visits = 0;
};

// Bundles the full inter-rater analysis of one panel (reference built by
// majority vote over the same table).
AgreementReport agreement_report(const AnnotationTable& table);

} // namespace panelval
