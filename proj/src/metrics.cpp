#include "panelval/metrics.hpp"

#include <cmath>

#include "panelval/common.hpp"

namespace panelval {

std::optional<double> MetricSuite::by_index(std::size_t i) const {
    switch (i) {
        case 0: return sensitivity;
        case 1: return specificity;
        case 2: return ppv;
        case 3: return npv;
        case 4: return f1;
        case 5: return balanced_accuracy;
        case 6: return mcc;
        case 7: return jaccard;
        default: throw InputError("metric index out of range");
    }
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t denom) {
    if (denom == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(denom);
}

} // namespace

MetricSuite compute_metrics(const ContingencyTable& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) {
        throw InputError("compute_metrics: negative cell count");
    }
    if (c.total() == 0) throw InputError("compute_metrics: empty contingency table");

    MetricSuite m;
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    m.ppv = ratio(c.tp, c.tp + c.fp);
    m.npv = ratio(c.tn, c.tn + c.fn);

    if (m.ppv.has_value() && m.sensitivity.has_value() && *m.ppv + *m.sensitivity > 0.0) {
        m.f1 = 2.0 * *m.ppv * *m.sensitivity / (*m.ppv + *m.sensitivity);
    }
    if (m.sensitivity.has_value() && m.specificity.has_value()) {
        m.balanced_accuracy = (*m.sensitivity + *m.specificity) / 2.0;
    }
    const double denom_sq = static_cast<double>(c.tp + c.fp) * static_cast<double>(c.tp + c.fn) *
                            static_cast<double>(c.tn + c.fp) * static_cast<double>(c.tn + c.fn);
    if (denom_sq > 0.0) {
        m.mcc = (static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                 static_cast<double>(c.fp) * static_cast<double>(c.fn)) /
                std::sqrt(denom_sq);
    }
    m.jaccard = ratio(c.tp, c.tp + c.fp + c.fn);
    return m;
}

ContingencyTable contingency_from_pairs(std::span<const OutcomePair> pairs) {
    ContingencyTable c;
    for (const auto& [predicted, actual] : pairs) {
        if (predicted && actual) {
            ++c.tp;
        } else if (predicted && !actual) {
            ++c.fp;
        } else if (!predicted && actual) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

ContingencyBuild build_contingency(const PredictionSet& predictions,
                                   const ReferenceLabeling& reference,
                                   const LabelScheme& scheme) {
    ContingencyBuild out;
    std::unordered_map<std::string, LabelCode> predicted;
    predicted.reserve(predictions.size());
    for (const auto& p : predictions) {
        if (!predicted.emplace(p.visit_id, p.label).second) {
            throw InputError("duplicate prediction for visit " + p.visit_id);
        }
        if (!reference.visit_index(p.visit_id).has_value()) {
            out.skipped_no_reference += 1;
        }
    }
    for (std::size_t i = 0; i < reference.n_visits(); ++i) {
        const auto& ref = reference.visits()[i];
        const auto it = predicted.find(reference.visit_ids()[i]);
        if (it == predicted.end()) {
            out.skipped_no_prediction += 1;
            continue;
        }
        if (!ref.label.has_value()) {
            out.skipped_no_reference += 1;
            continue;
        }
        out.pairs.emplace_back(scheme.is_positive(it->second), scheme.is_positive(*ref.label));
    }
    if (out.pairs.empty()) {
        throw InputError("build_contingency: no visit has both a prediction and a reference");
    }
    out.table = contingency_from_pairs(out.pairs);
    return out;
}

} // namespace panelval
