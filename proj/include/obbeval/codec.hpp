// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "obbeval/detection.hpp"

namespace obbeval {

inline constexpr int kNumBins = 1000;

/// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string normalize_category(std::string_view name);

/// Ordered set of category names. Names must be non-empty, free of '<' and
/// '>', and unique after normalize_category().
class CategorySet {
 public:
  CategorySet() = default;
  explicit CategorySet(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  /// Index of the category whose normalized form equals normalize(name).
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  const std::string& operator[](std::size_t i) const { return names_[i]; }

  friend bool operator==(const CategorySet&, const CategorySet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> normalized_;
};

/// Axis value in pixels -> bin in [0, 1000], rounding half away from zero
/// and clamping out-of-image values. Throws kInvalidArgument if extent <= 0.
int quantize(double value, double extent);

/// Bin -> pixels. Throws kOutOfRange for bins outside [0, 1000] and
/// kInvalidArgument if extent <= 0.
double dequantize(int bin, double extent);

/// Eight bins (x1, y1, ..., x4, y4) of a box canonicalized on the integer
/// grid.
using QuantizedBox = std::array<int, 8>;

QuantizedBox quantize_box(const QuadBox& box, double image_width,
                          double image_height);
QuadBox dequantize_box(const QuantizedBox& bins, double image_width,
                       double image_height);

struct ResponseDoc {
  std::string text;
  double image_width = 0.0;
  double image_height = 0.0;
};

/// Canonical response text for one image: category blocks in ascending
/// name order joined by "<sep>", each block the category name followed by
/// 8 <loc_V> tokens per box, boxes in raster order of the starting vertex.
/// No detections produce the empty string. Throws kInvalidArgument on a
/// category outside `categories` or a non-positive image extent.
ResponseDoc serialize(const std::vector<Detection>& detections,
                      const CategorySet& categories, double image_width,
                      double image_height);

enum class WarningKind {
  kUnknownCategory,
  kDanglingCoordinates,
  kOutOfRangeBin,
  kEmptyResponse,
};

std::string_view to_string(WarningKind kind);

struct ParseWarning {
  WarningKind kind;
  std::size_t begin = 0;  // byte span in the response text
  std::size_t end = 0;
  std::string message;
};

struct ParseReport {
  std::vector<Detection> detections;
  std::vector<ParseWarning> warnings;
};

/// Extracts detections from model text. Never throws on malformed text:
/// every discarded fragment is reported as a warning. Parsed detections have
/// confidence 1.0 and an empty image_id.
ParseReport parse(const ResponseDoc& doc, const CategorySet& categories);

/// Unit-cost edit distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Maps free-form category text onto the set. An exact match after
/// normalization wins. Otherwise a category is acceptable when the name is a
/// substring of it and the distance is at most len(cat) - len(name) + 2, or
/// when distance / max length <= 0.34; the acceptable category with the
/// smallest distance is returned, ties by name order.
std::optional<std::string> fuzzy_match(std::string_view name,
                                       const CategorySet& categories);

}  // namespace obbeval
