// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "obbeval/geometry.hpp"

namespace obbeval {

/// One object: a prediction (confidence may be present) or a ground truth
/// (difficult may be set).
struct Detection {
  std::string image_id;
  std::string category;
  QuadBox box;
  std::optional<double> confidence;
  bool difficult = false;

  friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace obbeval
