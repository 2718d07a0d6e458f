#include "mudslide/aggregation.hpp"

#include <algorithm>
#include <cmath>

namespace mudslide {

std::string_view to_string(ColorMode mode) {
  return mode == ColorMode::TwoTone ? "two_tone" : "four_level";
}

ColorMode parse_color_mode(std::string_view text) {
  if (text == "two_tone") return ColorMode::TwoTone;
  if (text == "four_level") return ColorMode::FourLevel;
  throw Error(ErrorCode::InvalidOptions, "unknown color mode '" + std::string(text) + "'");
}

std::string_view to_string(ColorClass color) {
  switch (color) {
    case ColorClass::Red: return "red";
    case ColorClass::Gray: return "gray";
    case ColorClass::L1: return "l1";
    case ColorClass::L2: return "l2";
    case ColorClass::L3: return "l3";
    case ColorClass::L4: return "l4";
  }
  return "gray";
}

ColorClass color_of(ConfusionRating rating, ColorMode mode) {
  if (mode == ColorMode::TwoTone) {
    return rating == ConfusionRating::NotConfusing ? ColorClass::Gray : ColorClass::Red;
  }
  switch (rating) {
    case ConfusionRating::ExtremelyConfusing: return ColorClass::L1;
    case ConfusionRating::ModeratelyConfusing: return ColorClass::L2;
    case ConfusionRating::SlightlyConfusing: return ColorClass::L3;
    case ConfusionRating::NotConfusing: return ColorClass::L4;
  }
  return ColorClass::L4;
}

const std::string& Palette::fill(ColorClass color) const {
  switch (color) {
    case ColorClass::Red: return red;
    case ColorClass::Gray: return gray;
    case ColorClass::L1: return level1;
    case ColorClass::L2: return level2;
    case ColorClass::L3: return level3;
    case ColorClass::L4: return level4;
  }
  return gray;
}

void HeatmapOptions::validate() const {
  if (!(radius_frac > 0.0 && radius_frac <= 0.25)) {
    throw Error(ErrorCode::InvalidOptions, "radius_frac must lie in (0, 0.25]");
  }
  if (!(opacity > 0.0 && opacity <= 1.0)) {
    throw Error(ErrorCode::InvalidOptions, "opacity must lie in (0, 1]");
  }
}

SlideAggregates points_by_slide(std::span<const MuddyCard> cards, const Lecture& lecture,
                                ColorMode mode) {
  SlideAggregates out;
  for (const Slide& s : lecture.slides) out[s.index].slide_index = s.index;

  std::size_t total = 0;
  for (const MuddyCard& card : cards) {
    if (card.mode != LectureMode::Spatial) continue;
    ConfusionRating rating = card.rating.value_or(ConfusionRating::NotConfusing);
    for (const MuddyPoint& p : card.points) {
      auto it = out.find(p.slide_index);
      if (it == out.end()) continue;
      it->second.points.push_back(PlacedPoint{p, card.card_id, rating, color_of(rating, mode)});
      ++total;
    }
  }
  for (auto& [index, agg] : out) {
    agg.point_count = agg.points.size();
    agg.share = total == 0 ? 0.0 : static_cast<double>(agg.point_count) / static_cast<double>(total);
  }
  return out;
}

std::optional<int> featured_slide(const SlideAggregates& aggregates) {
  std::optional<int> best;
  std::size_t best_count = 0;
  // std::map iterates in ascending index, so strict > keeps the lowest on ties.
  for (const auto& [index, agg] : aggregates) {
    if (agg.point_count > best_count) {
      best = index;
      best_count = agg.point_count;
    }
  }
  return best;
}

std::vector<PlacedPoint> hit_test(ClickPoint click, const Slide& slide,
                                  std::span<const PlacedPoint> points,
                                  const HeatmapOptions& opts) {
  const double w = slide.width;
  const double h = slide.height;
  const double radius = opts.radius_frac * w;
  std::vector<PlacedPoint> hits;
  for (const PlacedPoint& p : points) {
    const double dx = (click.x - p.point.x) * w;
    const double dy = (click.y - p.point.y) * h;
    if (std::sqrt(dx * dx + dy * dy) <= radius) hits.push_back(p);
  }
  return hits;
}

std::vector<SlideComment> slide_comments(int slide_index, std::span<const MuddyCard> cards,
                                         const Lecture& lecture) {
  if (lecture.find_slide(slide_index) == nullptr) {
    throw Error(ErrorCode::BadSlideIndex,
                "slide " + std::to_string(slide_index) + " is not part of this lecture");
  }
  std::vector<SlideComment> out;
  for (const MuddyCard& card : cards) {
    for (const MuddyPoint& p : card.points) {
      if (p.slide_index != slide_index) continue;
      out.push_back(SlideComment{p.text, card.rating.value_or(ConfusionRating::NotConfusing),
                                 card.card_id});
    }
  }
  return out;
}

std::vector<BaselineComment> baseline_comments(std::span<const MuddyCard> cards) {
  std::vector<BaselineComment> out;
  out.reserve(cards.size());
  for (const MuddyCard& card : cards) {
    if (!card.free_text) continue;
    out.push_back(BaselineComment{*card.free_text,
                                  card.rating.value_or(ConfusionRating::NotConfusing),
                                  card.card_id});
  }
  std::stable_sort(out.begin(), out.end(), [](const BaselineComment& a, const BaselineComment& b) {
    return ordinal(a.rating) > ordinal(b.rating);
  });
  return out;
}

SummaryStats summary(std::span<const MuddyCard> cards, const Lecture& lecture) {
  SummaryStats stats;
  stats.card_count = cards.size();
  for (const MuddyCard& card : cards) {
    if (card.rating) ++stats.rating_histogram[ordinal(*card.rating)];
  }
  if (lecture.mode == LectureMode::Spatial) {
    SlideAggregates aggregates = points_by_slide(cards, lecture);
    for (const auto& [index, agg] : aggregates) stats.point_count += agg.point_count;
    stats.featured_slide = featured_slide(aggregates);
  }
  stats.points_per_card_mean =
      stats.card_count == 0
          ? 0.0
          : static_cast<double>(stats.point_count) / static_cast<double>(stats.card_count);
  return stats;
}

}  // namespace mudslide
