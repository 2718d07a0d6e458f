#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mudslide/core.hpp"

namespace mudslide {

enum class ColorMode { TwoTone, FourLevel };
enum class ColorClass { Red, Gray, L1, L2, L3, L4 };

std::string_view to_string(ColorMode mode);   // "two_tone" | "four_level"
ColorMode parse_color_mode(std::string_view text);
std::string_view to_string(ColorClass color);  // "red", "gray", "l1".."l4"

// TwoTone: NotConfusing is Gray, everything else Red.
// FourLevel: L1 = ExtremelyConfusing .. L4 = NotConfusing.
ColorClass color_of(ConfusionRating rating, ColorMode mode);

struct PlacedPoint {
  MuddyPoint point;
  std::string card_id;
  ConfusionRating rating = ConfusionRating::NotConfusing;
  ColorClass color_class = ColorClass::Gray;

  bool operator==(const PlacedPoint&) const = default;
};

struct SlideAggregate {
  int slide_index = 0;
  std::vector<PlacedPoint> points;  // submission order
  std::size_t point_count = 0;
  double share = 0.0;  // of all lecture points; 0 when the lecture has none
};

using SlideAggregates = std::map<int, SlideAggregate>;

// Every slide of the lecture gets an entry, empty or not. Cards are expected
// to be validated; points referring to unknown slides are skipped.
SlideAggregates points_by_slide(std::span<const MuddyCard> cards, const Lecture& lecture,
                                ColorMode mode = ColorMode::TwoTone);

// Slide with the most points, lowest index on ties, none when there are
// no points at all.
std::optional<int> featured_slide(const SlideAggregates& aggregates);

struct Palette {
  std::string red = "#d62728";
  std::string gray = "#888888";
  std::string level1 = "#d62728";
  std::string level2 = "#ff7f0e";
  std::string level3 = "#e6c229";
  std::string level4 = "#888888";

  const std::string& fill(ColorClass color) const;
};

struct HeatmapOptions {
  double radius_frac = 0.03;  // of slide width
  double opacity = 0.35;
  ColorMode color_mode = ColorMode::TwoTone;
  bool visible = true;
  Palette palette;

  // Throws Error(InvalidOptions) unless 0 < radius_frac <= 0.25 and
  // 0 < opacity <= 1.
  void validate() const;
};

struct ClickPoint {
  double x = 0.0;
  double y = 0.0;
};

// Points whose circle contains the click, measured in native pixels:
// hypot((cx-px)*W, (cy-py)*H) <= radius_frac*W. Input order is kept.
std::vector<PlacedPoint> hit_test(ClickPoint click, const Slide& slide,
                                  std::span<const PlacedPoint> points,
                                  const HeatmapOptions& opts);

struct SlideComment {
  std::string text;
  ConfusionRating rating = ConfusionRating::NotConfusing;
  std::string card_id;

  bool operator==(const SlideComment&) const = default;
};

// Throws Error(BadSlideIndex) when the slide is not part of the lecture.
std::vector<SlideComment> slide_comments(int slide_index, std::span<const MuddyCard> cards,
                                         const Lecture& lecture);

struct BaselineComment {
  std::string free_text;
  ConfusionRating rating = ConfusionRating::NotConfusing;
  std::string card_id;

  bool operator==(const BaselineComment&) const = default;
};

// Most confusing first; stable within a rating.
std::vector<BaselineComment> baseline_comments(std::span<const MuddyCard> cards);

struct SummaryStats {
  std::size_t card_count = 0;
  std::size_t point_count = 0;
  double points_per_card_mean = 0.0;
  std::array<std::size_t, 4> rating_histogram{};  // indexed by ordinal(rating)
  std::optional<int> featured_slide;

  bool operator==(const SummaryStats&) const = default;
};

SummaryStats summary(std::span<const MuddyCard> cards, const Lecture& lecture);

// Deterministic SVG 1.1 overlay sized to the slide's native dimensions.
// `image_href` defaults to the slide's image_file.
std::string render_heatmap_svg(const Slide& slide, const SlideAggregate& aggregate,
                               const HeatmapOptions& opts, std::string_view image_href = {});

}  // namespace mudslide
