// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "obbeval/codec.hpp"
#include "obbeval/detection.hpp"

namespace obbeval {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// Detections file: one record per line,
///   image_id x1 y1 x2 y2 x3 y3 x4 y4 category [confidence]
/// Pixel coordinates; the category may contain spaces. Records without the
/// confidence column load with no confidence.
std::string format_detection(const Detection& det);
Detection parse_detection_line(std::string_view line);
std::vector<Detection> read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections);

struct ResponseRecord {
  std::string image_id;
  std::string response;
};

/// Responses file: `image_id<TAB>response` per line; the response may be
/// empty.
std::vector<ResponseRecord> read_responses(const std::filesystem::path& path);
void write_responses(const std::filesystem::path& path,
                     const std::vector<ResponseRecord>& records);

/// One category per line; blank lines and lines starting with '#' skipped.
CategorySet read_categories(const std::filesystem::path& path);

/// Writes text atomically enough for CLI use (truncate + write), throwing
/// kIo on failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace obbeval
