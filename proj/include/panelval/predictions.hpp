#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panelval/labels.hpp"

namespace panelval {

// One classifier output: hard label plus optional probability of the
// scheme's positive class.
struct PredictionRecord {
    std::string visit_id;
    LabelCode label = kMissingLabel;
    std::optional<double> probability;
};

using PredictionSet = std::vector<PredictionRecord>;

} // namespace panelval
