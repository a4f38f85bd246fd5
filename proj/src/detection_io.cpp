// SPDX-License-Identifier: Apache-2.0
#include "obbeval/detection_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "obbeval/error.hpp"

namespace obbeval {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf.data(), ptr);
}

std::string format_detection(const Detection& det) {
  std::string out = det.image_id;
  for (const double c : det.box.coords()) {
    out += ' ';
    out += format_number(c);
  }
  out += ' ';
  out += det.category;
  if (det.confidence) {
    out += ' ';
    out += format_number(*det.confidence);
  }
  return out;
}

Detection parse_detection_line(std::string_view line) {
  const auto tokens = split_ws(line);
  if (tokens.size() < 10) {
    throw Error(ErrorKind::kMalformedLine,
                "expected image id, 8 coordinates and a category, got " +
                    std::to_string(tokens.size()) + " fields");
  }
  Detection det;
  det.image_id = std::string(tokens[0]);
  std::array<double, 8> coords{};
  for (std::size_t i = 0; i < 8; ++i) {
    const auto v = to_double(tokens[i + 1]);
    if (!v) {
      throw Error(ErrorKind::kMalformedLine,
                  "coordinate " + std::to_string(i + 1) + " is not a number: '" +
                      std::string(tokens[i + 1]) + "'");
    }
    coords[i] = *v;
  }
  std::size_t cat_end = tokens.size();
  if (tokens.size() >= 11) {
    if (const auto conf = to_double(tokens.back())) {
      if (*conf < 0.0 || *conf > 1.0) {
        throw Error(ErrorKind::kMalformedLine,
                    "confidence outside [0, 1]: " + std::string(tokens.back()));
      }
      det.confidence = *conf;
      --cat_end;
    }
  }
  for (std::size_t i = 9; i < cat_end; ++i) {
    if (i > 9) det.category += ' ';
    det.category += tokens[i];
  }
  det.box = canonicalize(coords);
  return det;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  std::vector<Detection> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (split_ws(lines[i]).empty()) continue;
    try {
      out.push_back(parse_detection_line(lines[i]));
    } catch (const Error& e) {
      throw Error(e.kind(),
                  path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections) {
  std::string text;
  for (const auto& d : detections) {
    text += format_detection(d);
    text += '\n';
  }
  write_text(path, text);
}

std::vector<ResponseRecord> read_responses(const std::filesystem::path& path) {
  std::vector<ResponseRecord> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorKind::kMalformedLine,
                  path.string() + ":" + std::to_string(i + 1) +
                      ": expected 'image_id<TAB>response'");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

void write_responses(const std::filesystem::path& path,
                     const std::vector<ResponseRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    text += r.image_id;
    text += '\t';
    text += r.response;
    text += '\n';
  }
  write_text(path, text);
}

CategorySet read_categories(const std::filesystem::path& path) {
  std::vector<std::string> names;
  for (auto& line : read_lines(path)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    names.push_back(line.substr(first, last - first + 1));
  }
  return CategorySet(std::move(names));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace obbeval
