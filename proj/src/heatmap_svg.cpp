#include <charconv>
#include <cmath>
#include <string>

#include "mudslide/aggregation.hpp"

namespace mudslide {

namespace {

// Shortest round-trip text of v rounded to 1/1000 px, so 520.0000000001
// prints as "520".
std::string number(double v) {
  double rounded = std::round(v * 1000.0) / 1000.0;
  if (rounded == 0.0) rounded = 0.0;  // drop negative zero
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rounded);
  return std::string(buf, end);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string render_heatmap_svg(const Slide& slide, const SlideAggregate& aggregate,
                               const HeatmapOptions& opts, std::string_view image_href) {
  const std::string w = std::to_string(slide.width);
  const std::string h = std::to_string(slide.height);
  const std::string href = xml_escape(image_href.empty() ? slide.image_file : image_href);
  const std::string r = number(opts.radius_frac * slide.width);
  const std::string opacity = number(opts.opacity);

  std::string svg;
  svg.reserve(512 + aggregate.points.size() * 160);
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\""
         " version=\"1.1\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w + " " +
         h + "\">\n";
  svg += "<g id=\"slide-layer\">\n";
  svg += "<image x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h + "\" xlink:href=\"" + href +
         "\"/>\n";
  svg += "</g>\n";
  svg += "<g id=\"muddy-points\" data-slide=\"" + std::to_string(slide.index) + "\"";
  if (!opts.visible) svg += " style=\"display:none\"";
  svg += ">\n";
  for (const PlacedPoint& p : aggregate.points) {
    ColorClass color = color_of(p.rating, opts.color_mode);
    svg += "<circle class=\"muddy-point " + std::string(to_string(color)) + "\" cx=\"" +
           number(p.point.x * slide.width) + "\" cy=\"" + number(p.point.y * slide.height) +
           "\" r=\"" + r + "\" fill=\"" + xml_escape(opts.palette.fill(color)) +
           "\" fill-opacity=\"" + opacity + "\" data-card=\"" + xml_escape(p.card_id) + "\"/>\n";
  }
  svg += "</g>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace mudslide
