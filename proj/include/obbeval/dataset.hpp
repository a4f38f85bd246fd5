// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obbeval/codec.hpp"
#include "obbeval/detection.hpp"

namespace obbeval {

struct ImageSize {
  double width = 1024.0;
  double height = 1024.0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Parses "WxH" (e.g. "1024x1024").
ImageSize parse_image_size(std::string_view text);

/// Where per-image dimensions come from: a sidecar map with a fixed
/// fallback for images it does not list.
struct ImageSizeSource {
  ImageSize fallback;
  std::map<std::string, ImageSize> per_image;

  ImageSize lookup(const std::string& image_id) const;

  /// Reads a JSON object {"image_id": {"width": W, "height": H}, ...}.
  static ImageSizeSource from_sidecar(const std::filesystem::path& path,
                                      ImageSize fallback);
};

struct Sample {
  std::string image_id;
  double image_width = 0.0;
  double image_height = 0.0;
  std::vector<Detection> gts;
  std::string source_dataset;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Corpus {
  std::string name;
  std::vector<Sample> samples;
  CategorySet category_set;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Parses one DOTA label line `x1 y1 ... x4 y4 category [difficult]`.
/// Categories may contain spaces; the trailing integer, if any, is the
/// difficulty flag. Throws kMalformedLine.
Detection parse_dota_line(std::string_view line);

/// Loads every *.txt file of `dir` (sorted by name) as one Sample whose
/// image_id is the file stem. Header lines (imagesource:, gsd:) and blank
/// lines are skipped. Without `categories` the set is the sorted union of
/// the names found. Throws kIo, kMalformedLine (with file:line), or
/// kUnknownCategory listing every offending line.
Corpus load_dota(const std::filesystem::path& dir,
                 const std::optional<CategorySet>& categories,
                 const ImageSizeSource& sizes, unsigned threads = 0);

/// Concatenates corpora. With two or more inputs, image ids become
/// "<corpus name>/<image id>" and duplicates raise kDuplicateId; a single
/// corpus is returned unchanged.
Corpus merge_concat(const std::vector<Corpus>& corpora);

/// r_i = max(1, round(max_size / size_i)). Throws kInvalidArgument on an
/// empty corpus.
std::vector<std::size_t> balanced_factors(const std::vector<Corpus>& corpora);

/// Repeats each corpus r_i times (whole-corpus repetition) then
/// concatenates. `factors` overrides the computed repetition counts.
Corpus merge_balanced(const std::vector<Corpus>& corpora,
                      const std::optional<std::vector<std::size_t>>& factors =
                          std::nullopt);

}  // namespace obbeval
