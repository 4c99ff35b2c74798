#pragma once

#include <string>
#include <vector>

#include "panelval/calibration.hpp"

namespace panelval {

// Self-contained SVG of the calibration curve: identity diagonal
// (dashed), apparent fit (gray) and bias-corrected fit (red).
std::string calibration_curve_svg(const std::vector<CurvePoint>& curve, int width = 560,
                                  int height = 560);

} // namespace panelval
