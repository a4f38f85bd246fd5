// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "obbeval/dataset.hpp"
#include "obbeval/detection.hpp"

namespace obbeval {

/// SVG overlay for one image: a blank canvas, one <polygon> per detection
/// colour-keyed by category, and a legend with one entry per category
/// present (alphabetical).
std::string render_svg(const std::string& image_id, ImageSize size,
                       const std::vector<Detection>& detections);

}  // namespace obbeval
