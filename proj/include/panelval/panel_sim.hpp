#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "panelval/annotations.hpp"
#include "panelval/calibration.hpp"

namespace panelval {

struct RaterProfile {
    double sensitivity = 0.9;
    double specificity = 0.9;
};

struct BetaShapes {
    double alpha = 1.0;
    double beta = 1.0;
};

// Defaults give a well-separated but imperfect probabilistic classifier.
inline constexpr BetaShapes kDefaultPositiveShapes{4.0, 2.0};
inline constexpr BetaShapes kDefaultNegativeShapes{1.0, 5.0};

struct PanelDesign {
    double prevalence = 0.25;
    std::vector<RaterProfile> raters;
    std::size_t n = 1000;
    std::optional<std::pair<BetaShapes, BetaShapes>> probability_model;  // (positive, negative)
    std::uint64_t seed = 0;
};

struct SimulatedPanel {
    std::vector<std::uint8_t> truth;  // 1 = positive class
    AnnotationTable table;
};

// Conditionally independent votes: truth ~ Bernoulli(prevalence), each
// rater errs per (se, sp) given truth. Binary scheme, reproducible from
// (design, seed) alone.
SimulatedPanel simulate_panel(const PanelDesign& design);

// Class-conditional Beta probabilities paired with the truth as outcome.
ProbabilitySeries simulate_probabilities(std::span<const std::uint8_t> truth,
                                         BetaShapes positive, BetaShapes negative,
                                         std::uint64_t seed);

} // namespace panelval
