// SPDX-License-Identifier: Apache-2.0
#include "obbeval/codec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <tuple>

#include "obbeval/error.hpp"

namespace obbeval {
namespace {

constexpr std::string_view kSep = "<sep>";
constexpr std::string_view kLocPrefix = "<loc_";
constexpr std::array<std::string_view, 4> kSpecialTokens = {"<s>", "</s>",
                                                            "<pad>", "<unk>"};

void require_extent(double extent) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw Error(ErrorKind::kInvalidArgument,
                "image extent must be positive, got " + std::to_string(extent));
  }
}

// Canonical order decided on the integer grid so that it survives the
// bin -> pixel -> bin trip exactly.
QuantizedBox canonical_bins(const std::array<int, 8>& raw) {
  std::array<double, 8> as_double{};
  for (std::size_t i = 0; i < 8; ++i) as_double[i] = raw[i];
  const auto canon = canonicalize(as_double).coords();
  QuantizedBox out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<int>(canon[i]);
  return out;
}

bool raster_less(const QuantizedBox& a, const QuantizedBox& b) {
  return std::tie(a[1], a[0], a) < std::tie(b[1], b[0], b);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

struct LocToken {
  long long value = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// A category run with the location tokens that follow it.
struct Group {
  std::string category;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<LocToken> locs;
  bool open = false;
};

class ResponseParser {
 public:
  ResponseParser(const ResponseDoc& doc, const CategorySet& categories)
      : doc_(doc), text_(doc.text), categories_(categories) {}

  ParseReport run() {
    if (trim(text_).empty()) {
      report_.warnings.push_back({WarningKind::kEmptyResponse, 0, text_.size(),
                                  "response contains no detections"});
      return std::move(report_);
    }
    std::size_t i = 0;
    while (i < text_.size()) {
      if (text_.compare(i, kSep.size(), kSep) == 0) {
        finish_group();
        i += kSep.size();
        continue;
      }
      if (auto loc = match_loc(i)) {
        if (!group_.open) start_group(i);
        group_.locs.push_back(*loc);
        group_.end = loc->end;
        i = loc->end;
        continue;
      }
      if (auto skip = match_special(i)) {
        i += skip;
        continue;
      }
      // Plain text: whitespace never splits a group, anything else after
      // coordinates starts the next one.
      const char ch = text_[i];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (group_.open && group_.locs.empty()) group_.category.push_back(ch);
        ++i;
        continue;
      }
      if (group_.open && !group_.locs.empty()) finish_group();
      if (!group_.open) start_group(i);
      group_.category.push_back(ch);
      group_.end = i + 1;
      ++i;
    }
    finish_group();
    return std::move(report_);
  }

 private:
  std::optional<LocToken> match_loc(std::size_t i) const {
    if (text_.compare(i, kLocPrefix.size(), kLocPrefix) != 0) return {};
    std::size_t j = i + kLocPrefix.size();
    const std::size_t digits_begin = j;
    long long value = 0;
    while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
      // Saturate; anything past the bin range is reported, not parsed.
      if (value < 1'000'000'000LL) value = value * 10 + (text_[j] - '0');
      ++j;
    }
    if (j == digits_begin || j >= text_.size() || text_[j] != '>') return {};
    return LocToken{value, i, j + 1};
  }

  std::size_t match_special(std::size_t i) const {
    for (const auto tok : kSpecialTokens) {
      if (text_.compare(i, tok.size(), tok) == 0) return tok.size();
    }
    return 0;
  }

  void start_group(std::size_t at) {
    group_ = Group{};
    group_.open = true;
    group_.begin = at;
    group_.end = at;
  }

  void warn(WarningKind kind, std::size_t begin, std::size_t end,
            std::string message) {
    report_.warnings.push_back({kind, begin, end, std::move(message)});
  }

  void finish_group() {
    if (!group_.open) return;
    Group g = std::move(group_);
    group_ = Group{};
    const std::string_view raw = trim(g.category);
    if (raw.empty() && g.locs.empty()) return;
    if (raw.empty()) {
      warn(WarningKind::kUnknownCategory, g.begin, g.end,
           "location tokens without a category");
      return;
    }
    const auto matched = fuzzy_match(raw, categories_);
    if (!matched) {
      warn(WarningKind::kUnknownCategory, g.begin, g.end,
           "unrecognized category '" + std::string(raw) + "'");
      return;
    }
    if (g.locs.empty()) {
      warn(WarningKind::kDanglingCoordinates, g.begin, g.end,
           "category '" + *matched + "' has no coordinates");
      return;
    }
    const std::size_t full = g.locs.size() / 8;
    for (std::size_t b = 0; b < full; ++b) {
      const auto first = g.locs.begin() + static_cast<std::ptrdiff_t>(8 * b);
      std::array<int, 8> bins{};
      bool in_range = true;
      for (std::size_t k = 0; k < 8; ++k) {
        const long long v = first[static_cast<std::ptrdiff_t>(k)].value;
        in_range = in_range && v <= kNumBins;
        bins[k] = static_cast<int>(std::min<long long>(v, kNumBins));
      }
      const std::size_t span_begin = first->begin;
      const std::size_t span_end = first[7].end;
      if (!in_range) {
        warn(WarningKind::kOutOfRangeBin, span_begin, span_end,
             "location bin above " + std::to_string(kNumBins));
        continue;
      }
      try {
        Detection det;
        det.category = *matched;
        det.box = dequantize_box(bins, doc_.image_width, doc_.image_height);
        det.confidence = 1.0;
        report_.detections.push_back(std::move(det));
      } catch (const Error& e) {
        // Only reachable with a non-positive image extent.
        warn(WarningKind::kOutOfRangeBin, span_begin, span_end, e.what());
      }
    }
    if (const std::size_t rem = g.locs.size() % 8; rem != 0) {
      const auto& first = g.locs[g.locs.size() - rem];
      warn(WarningKind::kDanglingCoordinates, first.begin, g.locs.back().end,
           std::to_string(rem) + " trailing location token(s) for '" +
               *matched + "'");
    }
  }

  const ResponseDoc& doc_;
  std::string_view text_;
  const CategorySet& categories_;
  Group group_;
  ParseReport report_;
};

}  // namespace

CategorySet::CategorySet(std::vector<std::string> names)
    : names_(std::move(names)) {
  normalized_.reserve(names_.size());
  for (const auto& n : names_) {
    std::string norm = normalize_category(n);
    if (norm.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "empty category name");
    }
    if (n.find_first_of("<>") != std::string::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "category name must not contain '<' or '>': " + n);
    }
    if (std::find(normalized_.begin(), normalized_.end(), norm) !=
        normalized_.end()) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate category: " + n);
    }
    normalized_.push_back(std::move(norm));
  }
}

std::optional<std::size_t> CategorySet::find(std::string_view name) const {
  const std::string norm = normalize_category(name);
  const auto it = std::find(normalized_.begin(), normalized_.end(), norm);
  if (it == normalized_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - normalized_.begin());
}

int quantize(double value, double extent) {
  require_extent(extent);
  if (std::isnan(value)) {
    throw Error(ErrorKind::kInvalidArgument, "cannot quantize NaN");
  }
  const double scaled = std::round(value / extent * kNumBins);
  return static_cast<int>(std::clamp(scaled, 0.0, double{kNumBins}));
}

double dequantize(int bin, double extent) {
  require_extent(extent);
  if (bin < 0 || bin > kNumBins) {
    throw Error(ErrorKind::kOutOfRange,
                "bin " + std::to_string(bin) + " outside [0, 1000]");
  }
  return static_cast<double>(bin) / kNumBins * extent;
}

QuantizedBox quantize_box(const QuadBox& box, double image_width,
                          double image_height) {
  std::array<int, 8> raw{};
  for (std::size_t i = 0; i < 4; ++i) {
    raw[2 * i] = quantize(box[i].x, image_width);
    raw[2 * i + 1] = quantize(box[i].y, image_height);
  }
  return canonical_bins(raw);
}

QuadBox dequantize_box(const QuantizedBox& bins, double image_width,
                       double image_height) {
  const QuantizedBox canon = canonical_bins(bins);
  std::array<Point, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    v[i] = {dequantize(canon[2 * i], image_width),
            dequantize(canon[2 * i + 1], image_height)};
  }
  return detail_adopt_canonical(v);
}

ResponseDoc serialize(const std::vector<Detection>& detections,
                      const CategorySet& categories, double image_width,
                      double image_height) {
  require_extent(image_width);
  require_extent(image_height);
  std::map<std::string, std::vector<QuantizedBox>> blocks;
  for (const auto& det : detections) {
    const auto idx = categories.find(det.category);
    if (!idx) {
      throw Error(ErrorKind::kInvalidArgument,
                  "category not in category set: " + det.category);
    }
    blocks[categories[*idx]].push_back(
        quantize_box(det.box, image_width, image_height));
  }

  ResponseDoc doc{{}, image_width, image_height};
  bool first_block = true;
  for (auto& [name, boxes] : blocks) {
    std::sort(boxes.begin(), boxes.end(), raster_less);
    if (!first_block) doc.text += kSep;
    first_block = false;
    doc.text += name;
    for (const auto& b : boxes) {
      for (const int v : b) {
        doc.text += kLocPrefix;
        doc.text += std::to_string(v);
        doc.text += '>';
      }
    }
  }
  return doc;
}

std::string_view to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::kUnknownCategory: return "unknown-category";
    case WarningKind::kDanglingCoordinates: return "dangling-coordinates";
    case WarningKind::kOutOfRangeBin: return "out-of-range-bin";
    case WarningKind::kEmptyResponse: return "empty-response";
  }
  return "unknown";
}

ParseReport parse(const ResponseDoc& doc, const CategorySet& categories) {
  return ResponseParser(doc, categories).run();
}

}  // namespace obbeval
