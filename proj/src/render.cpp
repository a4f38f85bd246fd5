// SPDX-License-Identifier: Apache-2.0
#include "obbeval/render.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "obbeval/detection_io.hpp"

namespace obbeval {
namespace {

constexpr std::array<const char*, 12> kPalette = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#9a6324"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::string& image_id, ImageSize size,
                       const std::vector<Detection>& detections) {
  std::set<std::string> names;
  for (const auto& d : detections) names.insert(d.category);
  const std::vector<std::string> legend(names.begin(), names.end());
  auto colour = [&legend](const std::string& name) {
    const auto it = std::lower_bound(legend.begin(), legend.end(), name);
    return kPalette[static_cast<std::size_t>(it - legend.begin()) % kPalette.size()];
  };

  const std::string w = format_number(size.width);
  const std::string h = format_number(size.height);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" +
         h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  svg += "  <title>" + escape_xml(image_id) + "</title>\n";
  svg += "  <rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"#202020\"/>\n";
  svg += "  <g class=\"detections\" fill-opacity=\"0.15\" stroke-width=\"2\">\n";
  for (const auto& d : detections) {
    std::string points;
    for (const auto& v : d.box.vertices()) {
      if (!points.empty()) points += ' ';
      points += format_number(v.x) + "," + format_number(v.y);
    }
    const char* c = colour(d.category);
    svg += "    <polygon points=\"" + points + "\" stroke=\"" + c + "\" fill=\"" + c +
           "\" data-category=\"" + escape_xml(d.category) + "\"/>\n";
  }
  svg += "  </g>\n";
  svg += "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"14\">\n";
  for (std::size_t i = 0; i < legend.size(); ++i) {
    const std::string y = std::to_string(10 + 20 * i);
    const std::string ty = std::to_string(22 + 20 * i);
    svg += "    <g class=\"legend-entry\"><rect x=\"10\" y=\"" + y +
           "\" width=\"14\" height=\"14\" fill=\"" + colour(legend[i]) +
           "\"/><text x=\"30\" y=\"" + ty + "\" fill=\"#ffffff\">" +
           escape_xml(legend[i]) + "</text></g>\n";
  }
  svg += "  </g>\n</svg>\n";
  return svg;
}

}  // namespace obbeval
