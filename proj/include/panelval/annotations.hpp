#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "panelval/labels.hpp"

namespace panelval {

using VoteMatrix =
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Visits x raters panel of categorical votes, possibly sparse
// (kMissingLabel cells). Immutable after construction.
class AnnotationTable {
public:
    AnnotationTable(LabelScheme scheme, std::vector<std::string> visit_ids,
                    std::vector<std::string> raters, VoteMatrix cells);

    const LabelScheme& scheme() const { return scheme_; }
    const std::vector<std::string>& visit_ids() const { return visit_ids_; }
    const std::vector<std::string>& raters() const { return raters_; }
    const VoteMatrix& cells() const { return cells_; }

    std::size_t n_visits() const { return visit_ids_.size(); }
    std::size_t n_raters() const { return raters_.size(); }

    LabelCode vote(std::size_t visit, std::size_t rater) const {
        return cells_(static_cast<Eigen::Index>(visit), static_cast<Eigen::Index>(rater));
    }
    std::size_t present_votes(std::size_t visit) const;
    bool fully_annotated(std::size_t visit) const;

    std::optional<std::size_t> visit_index(std::string_view visit_id) const;

    bool operator==(const AnnotationTable& other) const;

private:
    LabelScheme scheme_;
    std::vector<std::string> visit_ids_;
    std::vector<std::string> raters_;
    VoteMatrix cells_;
    std::unordered_map<std::string, std::size_t> visit_index_;
};

// Incremental construction with duplicate-cell detection; visit and rater
// order is first-appearance order.
class AnnotationTableBuilder {
public:
    explicit AnnotationTableBuilder(LabelScheme scheme) : scheme_(std::move(scheme)) {}

    // Throws InputError on duplicate (visit, rater) pairs.
    void add_vote(std::string_view visit_id, std::string_view rater_id, LabelCode label);
    AnnotationTable build() &&;

private:
    LabelScheme scheme_;
    std::vector<std::string> visit_ids_;
    std::vector<std::string> raters_;
    std::unordered_map<std::string, std::size_t> visit_lookup_;
    std::unordered_map<std::string, std::size_t> rater_lookup_;
    std::unordered_set<std::uint64_t> cell_keys_;
    std::vector<std::tuple<std::size_t, std::size_t, LabelCode>> votes_;
};

} // namespace panelval
