#include "panelval/consensus.hpp"

#include <algorithm>

#include "panelval/common.hpp"

namespace panelval {

ReferenceLabeling::ReferenceLabeling(LabelScheme scheme, std::vector<std::string> visit_ids,
                                     std::vector<VisitReference> visits)
    : scheme_(std::move(scheme)), visit_ids_(std::move(visit_ids)), visits_(std::move(visits)) {
    if (visit_ids_.size() != visits_.size()) {
        throw InputError("reference labeling shape mismatch");
    }
    for (std::size_t i = 0; i < visit_ids_.size(); ++i) {
        if (!index_.emplace(visit_ids_[i], i).second) {
            throw InputError("duplicate visit id in reference: " + visit_ids_[i]);
        }
        if (visits_[i].vote_counts.size() != scheme_.size()) {
            throw InputError("vote count vector does not match scheme");
        }
        if (visits_[i].unanimous && !visits_[i].label.has_value()) {
            throw InputError("unanimous visit without a reference label: " + visit_ids_[i]);
        }
    }
}

std::optional<std::size_t> ReferenceLabeling::visit_index(std::string_view visit_id) const {
    const auto it = index_.find(std::string(visit_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t ReferenceLabeling::n_consensus() const {
    std::size_t n = 0;
    for (const auto& v : visits_) {
        if (v.label.has_value()) ++n;
    }
    return n;
}

std::size_t ReferenceLabeling::n_unanimous() const {
    std::size_t n = 0;
    for (const auto& v : visits_) {
        if (v.unanimous) ++n;
    }
    return n;
}

std::size_t ReferenceLabeling::count_with_label(LabelCode code) const {
    std::size_t n = 0;
    for (const auto& v : visits_) {
        if (v.label.has_value() && *v.label == code) ++n;
    }
    return n;
}

ReferenceLabeling majority_reference(const AnnotationTable& table) {
    std::vector<VisitReference> visits;
    visits.reserve(table.n_visits());
    for (std::size_t i = 0; i < table.n_visits(); ++i) {
        VisitReference ref;
        ref.vote_counts.assign(table.scheme().size(), 0);
        std::size_t present = 0;
        for (std::size_t j = 0; j < table.n_raters(); ++j) {
            const LabelCode c = table.vote(i, j);
            if (c == kMissingLabel) continue;
            ref.vote_counts[static_cast<std::size_t>(c)] += 1;
            ++present;
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < ref.vote_counts.size(); ++k) {
            if (ref.vote_counts[k] > ref.vote_counts[best]) best = k;
        }
        if (2 * ref.vote_counts[best] > present) {
            ref.label = static_cast<LabelCode>(best);
            ref.unanimous = ref.vote_counts[best] == present;
        }
        visits.push_back(std::move(ref));
    }
    return ReferenceLabeling(table.scheme(), table.visit_ids(), std::move(visits));
}

ExactMatchResult exact_match_rate(const AnnotationTable& table) {
    if (table.n_raters() < 2) throw InputError("exact_match_rate: needs >= 2 raters");
    ExactMatchResult out;
    for (std::size_t i = 0; i < table.n_visits(); ++i) {
        if (!table.fully_annotated(i)) {
            out.excluded_incomplete += 1;
            continue;
        }
        out.fully_annotated_visits += 1;
        const LabelCode first = table.vote(i, 0);
        bool same = true;
        for (std::size_t j = 1; j < table.n_raters(); ++j) {
            if (table.vote(i, j) != first) {
                same = false;
                break;
            }
        }
        if (same) out.unanimous_visits += 1;
    }
    if (out.fully_annotated_visits == 0) {
        throw InputError("exact_match_rate: no fully-annotated visits");
    }
    out.rate = static_cast<double>(out.unanimous_visits) /
               static_cast<double>(out.fully_annotated_visits);
    return out;
}

KappaResult fleiss_kappa(const AnnotationTable& table) {
    const std::size_t k = table.n_raters();
    if (k < 2) throw InputError("fleiss_kappa: needs >= 2 raters");
    const std::size_t n_cat = table.scheme().size();

    KappaResult out;
    double sum_pi = 0.0;
    std::vector<double> category_totals(n_cat, 0.0);
    for (std::size_t i = 0; i < table.n_visits(); ++i) {
        if (!table.fully_annotated(i)) {
            out.excluded_visits += 1;
            continue;
        }
        out.included_visits += 1;
        std::vector<std::size_t> counts(n_cat, 0);
        for (std::size_t j = 0; j < k; ++j) {
            counts[static_cast<std::size_t>(table.vote(i, j))] += 1;
        }
        double sq = 0.0;
        for (std::size_t c = 0; c < n_cat; ++c) {
            sq += static_cast<double>(counts[c]) * static_cast<double>(counts[c]);
            category_totals[c] += static_cast<double>(counts[c]);
        }
        sum_pi += (sq - static_cast<double>(k)) /
                  (static_cast<double>(k) * static_cast<double>(k - 1));
    }
    if (out.included_visits == 0) {
        throw InputError("fleiss_kappa: no visits with a full vote set");
    }
    const double n = static_cast<double>(out.included_visits);
    const double p_bar = sum_pi / n;
    double pe = 0.0;
    const double assignments = n * static_cast<double>(k);
    for (std::size_t c = 0; c < n_cat; ++c) {
        const double pj = category_totals[c] / assignments;
        pe += pj * pj;
    }
    if (pe >= 1.0) {
        out.status = KappaStatus::undefined_single_category;
        return out;
    }
    out.kappa = (p_bar - pe) / (1.0 - pe);
    return out;
}

std::vector<RaterMatchRate> rater_match_rates(const AnnotationTable& table,
                                              const ReferenceLabeling& reference) {
    std::vector<RaterMatchRate> out;
    out.reserve(table.n_raters());
    for (std::size_t j = 0; j < table.n_raters(); ++j) {
        RaterMatchRate r;
        r.rater = table.raters()[j];
        for (std::size_t i = 0; i < table.n_visits(); ++i) {
            const LabelCode vote = table.vote(i, j);
            if (vote == kMissingLabel) continue;
            const auto idx = reference.visit_index(table.visit_ids()[i]);
            if (!idx.has_value()) {
                throw InputError("rater_match_rates: reference does not cover visit " +
                                 table.visit_ids()[i]);
            }
            const auto& ref = reference.visits()[*idx];
            if (!ref.label.has_value()) continue;  // no consensus, excluded
            r.countable += 1;
            if (vote == *ref.label) r.matched += 1;
        }
        if (r.countable == 0) {
            throw InputError("rater_match_rates: rater \"" + r.rater +
                             "\" has no countable votes");
        }
        r.rate = static_cast<double>(r.matched) / static_cast<double>(r.countable);
        out.push_back(std::move(r));
    }
    return out;
}

bool qualification_gate(double rate, double threshold) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InputError("qualification_gate: rate outside [0,1]");
    return rate >= threshold;
}

AgreementReport agreement_report(const AnnotationTable& table) {
    AgreementReport report;
    report.n_visits = table.n_visits();
    report.exact_match = exact_match_rate(table);
    report.kappa = fleiss_kappa(table);
    const ReferenceLabeling reference = majority_reference(table);
    report.no_consensus_visits = reference.n_visits() - reference.n_consensus();
    report.per_rater_match = rater_match_rates(table, reference);
    return report;
}

} // namespace panelval
