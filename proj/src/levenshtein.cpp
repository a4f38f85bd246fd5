// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <numeric>
#include <vector>

#include "obbeval/codec.hpp"

namespace obbeval {

std::string normalize_category(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (const char ch : name) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // Two-row DP over the shorter string.
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string> fuzzy_match(std::string_view name,
                                       const CategorySet& categories) {
  const std::string query = normalize_category(name);
  if (query.empty()) return std::nullopt;
  if (auto exact = categories.find(query)) return categories[*exact];

  std::optional<std::size_t> best;
  std::size_t best_distance = 0;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string target = normalize_category(categories[i]);
    const std::size_t d = levenshtein(query, target);
    bool accept = false;
    if (target.find(query) != std::string::npos) {
      accept = d + query.size() <= target.size() + 2;
    }
    if (!accept) {
      const double longest =
          static_cast<double>(std::max(query.size(), target.size()));
      accept = static_cast<double>(d) / longest <= 0.34;
    }
    if (!accept) continue;
    if (!best || d < best_distance ||
        (d == best_distance && categories[i] < categories[*best])) {
      best = i;
      best_distance = d;
    }
  }
  if (!best) return std::nullopt;
  return categories[*best];
}

}  // namespace obbeval
