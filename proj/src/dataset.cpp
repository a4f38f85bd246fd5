// SPDX-License-Identifier: Apache-2.0
#include "obbeval/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "obbeval/error.hpp"

namespace obbeval {
namespace fs = std::filesystem;
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
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long> to_int(std::string_view s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_header_line(std::string_view line) {
  return line.starts_with("imagesource:") || line.starts_with("gsd:");
}

struct FileResult {
  Sample sample;
  std::optional<std::string> error;  // first malformed line
};

FileResult load_file(const fs::path& path, const ImageSizeSource& sizes) {
  FileResult result;
  const std::string id = path.stem().string();
  const ImageSize size = sizes.lookup(id);
  result.sample.image_id = id;
  result.sample.image_width = size.width;
  result.sample.image_height = size.height;

  std::ifstream in(path);
  if (!in) {
    result.error = "cannot read " + path.string();
    return result;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_ws(line).empty() || is_header_line(line)) continue;
    try {
      Detection det = parse_dota_line(line);
      det.image_id = id;
      result.sample.gts.push_back(std::move(det));
    } catch (const Error& e) {
      result.error = path.string() + ":" + std::to_string(line_no) + ": " + e.what();
      return result;
    }
  }
  return result;
}

Corpus namespaced_concat(const std::vector<Corpus>& corpora) {
  Corpus out;
  std::vector<std::string> names;
  std::vector<std::string> categories;
  std::set<std::string> seen_ids;
  for (const auto& corpus : corpora) {
    names.push_back(corpus.name);
    for (const auto& c : corpus.category_set.names()) {
      const bool known = std::any_of(
          categories.begin(), categories.end(), [&c](const std::string& k) {
            return normalize_category(k) == normalize_category(c);
          });
      if (!known) categories.push_back(c);
    }
    for (Sample s : corpus.samples) {
      s.image_id = corpus.name + "/" + s.image_id;
      for (auto& g : s.gts) g.image_id = s.image_id;
      if (!seen_ids.insert(s.image_id).second) {
        throw Error(ErrorKind::kDuplicateId, "duplicate image id " + s.image_id);
      }
      out.samples.push_back(std::move(s));
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) joined += '+';
    joined += names[i];
  }
  out.name = joined;
  out.category_set = CategorySet(std::move(categories));
  return out;
}

}  // namespace

ImageSize parse_image_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x != std::string_view::npos) {
    const auto w = to_double(text.substr(0, x));
    const auto h = to_double(text.substr(x + 1));
    if (w && h && *w > 0.0 && *h > 0.0 && std::isfinite(*w) && std::isfinite(*h)) {
      return {*w, *h};
    }
  }
  throw Error(ErrorKind::kInvalidArgument,
              "image size must look like WxH with positive values, got '" +
                  std::string(text) + "'");
}

ImageSize ImageSizeSource::lookup(const std::string& image_id) const {
  const auto it = per_image.find(image_id);
  return it == per_image.end() ? fallback : it->second;
}

ImageSizeSource ImageSizeSource::from_sidecar(const fs::path& path,
                                              ImageSize fallback) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  ImageSizeSource src;
  src.fallback = fallback;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& [id, dims] : doc.items()) {
      const ImageSize size{dims.at("width").get<double>(),
                           dims.at("height").get<double>()};
      if (!(size.width > 0.0 && size.height > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "non-positive image size for " + id);
      }
      src.per_image[id] = size;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedLine,
                path.string() + ": bad image size sidecar: " + e.what());
  }
  return src;
}

Detection parse_dota_line(std::string_view line) {
  const auto tokens = split_ws(line);
  if (tokens.size() < 9) {
    throw Error(ErrorKind::kMalformedLine,
                "expected 8 coordinates and a category, got " +
                    std::to_string(tokens.size()) + " fields");
  }
  std::array<double, 8> coords{};
  for (std::size_t i = 0; i < 8; ++i) {
    const auto v = to_double(tokens[i]);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorKind::kMalformedLine,
                  "coordinate " + std::to_string(i + 1) + " is not a number: '" +
                      std::string(tokens[i]) + "'");
    }
    coords[i] = *v;
  }
  std::size_t cat_end = tokens.size();
  Detection det;
  if (tokens.size() >= 10) {
    if (const auto flag = to_int(tokens.back())) {
      det.difficult = *flag != 0;
      --cat_end;
    }
  }
  for (std::size_t i = 8; i < cat_end; ++i) {
    if (i > 8) det.category += ' ';
    det.category += tokens[i];
  }
  det.box = canonicalize(coords);
  return det;
}

Corpus load_dota(const fs::path& dir,
                 const std::optional<CategorySet>& categories,
                 const ImageSizeSource& sizes, unsigned threads) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::kIo, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw Error(ErrorKind::kIo, "cannot list " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<FileResult> results(files.size());
  const unsigned workers = std::max(
      1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                             static_cast<unsigned>(std::max<std::size_t>(files.size(), 1))));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      results[i] = load_file(files[i], sizes);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  Corpus corpus;
  corpus.name = dir.filename().string();
  if (corpus.name.empty()) corpus.name = dir.parent_path().filename().string();
  for (auto& r : results) {
    if (r.error) {
      const bool io = r.error->starts_with("cannot read");
      throw Error(io ? ErrorKind::kIo : ErrorKind::kMalformedLine, *r.error);
    }
    r.sample.source_dataset = corpus.name;
    corpus.samples.push_back(std::move(r.sample));
  }

  if (categories) {
    std::string unknown;
    std::size_t n_unknown = 0;
    for (auto& s : corpus.samples) {
      for (auto& g : s.gts) {
        const auto idx = categories->find(g.category);
        if (!idx) {
          ++n_unknown;
          unknown += "\n  " + s.image_id + ": '" + g.category + "'";
        } else {
          g.category = (*categories)[*idx];
        }
      }
    }
    if (n_unknown > 0) {
      throw Error(ErrorKind::kUnknownCategory,
                  std::to_string(n_unknown) + " annotation(s) in " + dir.string() +
                      " use unknown categories:" + unknown);
    }
    corpus.category_set = *categories;
  } else {
    std::set<std::string> found;
    for (const auto& s : corpus.samples) {
      for (const auto& g : s.gts) found.insert(g.category);
    }
    corpus.category_set =
        CategorySet(std::vector<std::string>(found.begin(), found.end()));
  }
  return corpus;
}

Corpus merge_concat(const std::vector<Corpus>& corpora) {
  if (corpora.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "merge needs at least one corpus");
  }
  if (corpora.size() == 1) return corpora.front();
  return namespaced_concat(corpora);
}

std::vector<std::size_t> balanced_factors(const std::vector<Corpus>& corpora) {
  if (corpora.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "merge needs at least one corpus");
  }
  std::size_t max_size = 0;
  for (const auto& c : corpora) {
    if (c.samples.empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "cannot balance empty corpus '" + c.name + "'");
    }
    max_size = std::max(max_size, c.samples.size());
  }
  std::vector<std::size_t> factors;
  for (const auto& c : corpora) {
    const double ratio =
        static_cast<double>(max_size) / static_cast<double>(c.samples.size());
    factors.push_back(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::round(ratio))));
  }
  return factors;
}

Corpus merge_balanced(const std::vector<Corpus>& corpora,
                      const std::optional<std::vector<std::size_t>>& factors) {
  std::vector<std::size_t> reps = balanced_factors(corpora);
  if (factors) {
    if (factors->size() != corpora.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "expected one repetition factor per corpus");
    }
    reps = *factors;
  }
  // Validates ids across corpora before any repetition.
  const Corpus base = merge_concat(corpora);
  Corpus out;
  out.name = base.name;
  out.category_set = base.category_set;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    const std::size_t n = corpora[i].samples.size();
    for (std::size_t r = 0; r < reps[i]; ++r) {
      out.samples.insert(out.samples.end(),
                         base.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                         base.samples.begin() + static_cast<std::ptrdiff_t>(offset + n));
    }
    offset += n;
  }
  return out;
}

}  // namespace obbeval
