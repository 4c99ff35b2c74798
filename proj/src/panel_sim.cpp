#include "panelval/panel_sim.hpp"

#include <string>

#include "panelval/common.hpp"
#include "panelval/rng.hpp"

namespace panelval {

namespace {

void check_rate(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        throw InputError(std::string("simulate_panel: ") + what + " must lie in (0,1)");
    }
}

} // namespace

SimulatedPanel simulate_panel(const PanelDesign& design) {
    if (design.n < 1) throw InputError("simulate_panel: n must be >= 1");
    if (design.raters.empty()) throw InputError("simulate_panel: needs at least one rater");
    check_rate(design.prevalence, "prevalence");
    for (const auto& r : design.raters) {
        check_rate(r.sensitivity, "sensitivity");
        check_rate(r.specificity, "specificity");
    }

    const LabelScheme scheme = LabelScheme::binary();
    const LabelCode positive = scheme.positive();
    const LabelCode negative = positive == 0 ? 1 : 0;

    RandomStream rs = RandomStream::for_stream(design.seed, 0x70616E656C73696DULL);
    std::vector<std::uint8_t> truth(design.n);
    VoteMatrix cells(static_cast<Eigen::Index>(design.n),
                     static_cast<Eigen::Index>(design.raters.size()));
    std::vector<std::string> visit_ids(design.n);
    for (std::size_t i = 0; i < design.n; ++i) {
        visit_ids[i] = "v" + std::to_string(i + 1);
        const bool is_pos = rs.bernoulli(design.prevalence);
        truth[i] = is_pos ? 1 : 0;
        for (std::size_t j = 0; j < design.raters.size(); ++j) {
            const auto& rater = design.raters[j];
            const bool votes_pos =
                is_pos ? rs.bernoulli(rater.sensitivity) : !rs.bernoulli(rater.specificity);
            cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                votes_pos ? positive : negative;
        }
    }
    std::vector<std::string> raters(design.raters.size());
    for (std::size_t j = 0; j < raters.size(); ++j) raters[j] = "r" + std::to_string(j + 1);

    return SimulatedPanel{std::move(truth),
                          AnnotationTable(scheme, std::move(visit_ids), std::move(raters),
                                          std::move(cells))};
}

ProbabilitySeries simulate_probabilities(std::span<const std::uint8_t> truth,
                                         BetaShapes positive, BetaShapes negative,
                                         std::uint64_t seed) {
    if (truth.empty()) throw InputError("simulate_probabilities: empty truth vector");
    if (!(positive.alpha > 0.0 && positive.beta > 0.0 && negative.alpha > 0.0 &&
          negative.beta > 0.0)) {
        throw InputError("simulate_probabilities: Beta shapes must be positive");
    }
    RandomStream rs = RandomStream::for_stream(seed, 0x70726F6273696DULL);
    std::vector<double> p(truth.size());
    std::vector<bool> y(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool is_pos = truth[i] != 0;
        const BetaShapes& shapes = is_pos ? positive : negative;
        p[i] = rs.beta(shapes.alpha, shapes.beta);
        y[i] = is_pos;
    }
    return ProbabilitySeries::create(std::move(p), std::move(y));
}

} // namespace panelval
