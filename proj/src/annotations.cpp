#include "panelval/annotations.hpp"

#include "panelval/common.hpp"

namespace panelval {

AnnotationTable::AnnotationTable(LabelScheme scheme, std::vector<std::string> visit_ids,
                                 std::vector<std::string> raters, VoteMatrix cells)
    : scheme_(std::move(scheme)),
      visit_ids_(std::move(visit_ids)),
      raters_(std::move(raters)),
      cells_(std::move(cells)) {
    if (cells_.rows() != static_cast<Eigen::Index>(visit_ids_.size()) ||
        cells_.cols() != static_cast<Eigen::Index>(raters_.size())) {
        throw InputError("annotation table shape mismatch");
    }
    for (std::size_t i = 0; i < visit_ids_.size(); ++i) {
        if (!visit_index_.emplace(visit_ids_[i], i).second) {
            throw InputError("duplicate visit id: " + visit_ids_[i]);
        }
    }
    std::unordered_map<std::string, std::size_t> rater_seen;
    for (std::size_t j = 0; j < raters_.size(); ++j) {
        if (!rater_seen.emplace(raters_[j], j).second) {
            throw InputError("duplicate rater id: " + raters_[j]);
        }
    }
    for (Eigen::Index i = 0; i < cells_.rows(); ++i) {
        bool any = false;
        for (Eigen::Index j = 0; j < cells_.cols(); ++j) {
            const LabelCode c = cells_(i, j);
            if (c == kMissingLabel) continue;
            if (c < 0 || static_cast<std::size_t>(c) >= scheme_.size()) {
                throw InputError("label code out of scheme range at visit " +
                                 visit_ids_[static_cast<std::size_t>(i)]);
            }
            any = true;
        }
        if (!any) {
            throw InputError("visit has no votes: " + visit_ids_[static_cast<std::size_t>(i)]);
        }
    }
}

std::size_t AnnotationTable::present_votes(std::size_t visit) const {
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < cells_.cols(); ++j) {
        if (cells_(static_cast<Eigen::Index>(visit), j) != kMissingLabel) ++k;
    }
    return k;
}

bool AnnotationTable::fully_annotated(std::size_t visit) const {
    return present_votes(visit) == n_raters();
}

std::optional<std::size_t> AnnotationTable::visit_index(std::string_view visit_id) const {
    const auto it = visit_index_.find(std::string(visit_id));
    if (it == visit_index_.end()) return std::nullopt;
    return it->second;
}

bool AnnotationTable::operator==(const AnnotationTable& other) const {
    return scheme_ == other.scheme_ && visit_ids_ == other.visit_ids_ &&
           raters_ == other.raters_ && cells_ == other.cells_;
}

void AnnotationTableBuilder::add_vote(std::string_view visit_id, std::string_view rater_id,
                                      LabelCode label) {
    if (label < 0 || static_cast<std::size_t>(label) >= scheme_.size()) {
        throw InputError("label code out of scheme range");
    }
    auto intern = [](auto& lookup, auto& names, std::string_view id) {
        const auto it = lookup.find(std::string(id));
        if (it != lookup.end()) return it->second;
        const std::size_t idx = names.size();
        names.emplace_back(id);
        lookup.emplace(names.back(), idx);
        return idx;
    };
    const std::size_t v = intern(visit_lookup_, visit_ids_, visit_id);
    const std::size_t r = intern(rater_lookup_, raters_, rater_id);
    const std::uint64_t key = (static_cast<std::uint64_t>(v) << 32) | static_cast<std::uint64_t>(r);
    if (!cell_keys_.insert(key).second) {
        throw InputError("duplicate cell for visit \"" + std::string(visit_id) +
                         "\", rater \"" + std::string(rater_id) + "\"");
    }
    votes_.emplace_back(v, r, label);
}

AnnotationTable AnnotationTableBuilder::build() && {
    VoteMatrix cells(static_cast<Eigen::Index>(visit_ids_.size()),
                     static_cast<Eigen::Index>(raters_.size()));
    cells.setConstant(kMissingLabel);
    for (const auto& [v, r, l] : votes_) {
        cells(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(r)) = l;
    }
    return AnnotationTable(std::move(scheme_), std::move(visit_ids_), std::move(raters_),
                           std::move(cells));
}

} // namespace panelval
