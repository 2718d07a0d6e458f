#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "mudslide/core.hpp"

namespace mudslide {
namespace {

using testing::make_lecture;
using testing::spatial_card;

std::vector<ViolationCode> codes(const ValidationResult& r) {
  std::vector<ViolationCode> out;
  for (const Violation& v : r) out.push_back(v.code);
  return out;
}

TEST(ParseRating, CanonicalAndDisplayLabels) {
  EXPECT_EQ(parse_rating("not confusing"), ConfusionRating::NotConfusing);
  EXPECT_EQ(parse_rating("NOT_CONFUSING"), ConfusionRating::NotConfusing);
  EXPECT_EQ(parse_rating("Extremely Confusing"), ConfusionRating::ExtremelyConfusing);
  EXPECT_EQ(parse_rating("moderately_confusing"), ConfusionRating::ModeratelyConfusing);
}

TEST(ParseRating, RejectsAnythingElse) {
  for (const char* bad : {"very confusing", "", "notconfusing", "not  confusing", "confusing"}) {
    try {
      parse_rating(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnknownRating);
    }
  }
}

TEST(ParseRating, InvertsCanonicalLabel) {
  for (ConfusionRating r : kAllRatings) {
    EXPECT_EQ(parse_rating(canonical_label(r)), r);
    EXPECT_EQ(parse_rating(display_label(r)), r);
  }
}

TEST(ConfusionRating, TotalOrder) {
  EXPECT_GT(ordinal(ConfusionRating::ExtremelyConfusing), ordinal(ConfusionRating::ModeratelyConfusing));
  EXPECT_GT(ordinal(ConfusionRating::ModeratelyConfusing), ordinal(ConfusionRating::SlightlyConfusing));
  EXPECT_GT(ordinal(ConfusionRating::SlightlyConfusing), ordinal(ConfusionRating::NotConfusing));
}

TEST(TrimText, UnicodeWhitespaceOnlyAtTheEnds) {
  EXPECT_EQ(trim_text("   "), "");
  EXPECT_EQ(trim_text("\t why  is this? \n"), "why  is this?");
  // NBSP, ideographic space, line separator.
  EXPECT_EQ(trim_text("\xC2\xA0" "a b" "\xE3\x80\x80\xE2\x80\xA8"), "a b");
  EXPECT_EQ(trim_text("\xE3\x80\x80"), "");
  EXPECT_EQ(trim_text("caf\xC3\xA9"), "caf\xC3\xA9");
}

TEST(Utf8Length, CountsCodePoints) {
  EXPECT_EQ(utf8_length(""), 0u);
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("caf\xC3\xA9"), 4u);
  EXPECT_EQ(utf8_length("\xF0\x9F\x98\x80"), 1u);
}

TEST(ValidateCard, AcceptsAWellFormedCard) {
  Lecture lecture = make_lecture(2);
  MuddyCard card = spatial_card(lecture, {{1, 0.0, 1.0, "edge"}, {2, 0.5, 0.5, "KE"}});
  EXPECT_TRUE(validate_card(card, lecture).empty());
}

TEST(ValidateCard, NoPoints) {
  Lecture lecture = make_lecture(2);
  EXPECT_EQ(codes(validate_card(spatial_card(lecture, {}), lecture)),
            std::vector{ViolationCode::NoPoints});
}

TEST(ValidateCard, BlankTextIsEmpty) {
  Lecture lecture = make_lecture(2);
  ValidationResult r = validate_card(spatial_card(lecture, {{1, 0.2, 0.2, "   "}}), lecture);
  ASSERT_EQ(codes(r), std::vector{ViolationCode::EmptyText});
  EXPECT_EQ(r[0].point_index, 0u);
}

TEST(ValidateCard, CoordinateOutOfRange) {
  Lecture lecture = make_lecture(2);
  EXPECT_EQ(codes(validate_card(spatial_card(lecture, {{1, 1.2, 0.2, "x"}}), lecture)),
            std::vector{ViolationCode::CoordOutOfRange});
  double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(codes(validate_card(spatial_card(lecture, {{1, 0.5, nan, "x"}}), lecture)),
            std::vector{ViolationCode::CoordOutOfRange});
  EXPECT_EQ(codes(validate_card(spatial_card(lecture, {{1, -0.0001, 0.5, "x"}}), lecture)),
            std::vector{ViolationCode::CoordOutOfRange});
}

TEST(ValidateCard, ReportsEveryViolationWithPointIndex) {
  Lecture lecture = make_lecture(2);
  MuddyCard card = spatial_card(lecture, {{1, 0.5, 0.5, "fine"},
                                          {3, 0.5, 0.5, "bad slide"},
                                          {2, 1.5, -1.0, ""},
                                          {2, 0.1, 0.1, std::string(kMaxTextLength + 1, 'a')}});
  card.rating.reset();
  ValidationResult r = validate_card(card, lecture);
  EXPECT_EQ(codes(r), (std::vector{ViolationCode::MissingRating, ViolationCode::BadSlideIndex,
                                   ViolationCode::CoordOutOfRange, ViolationCode::EmptyText,
                                   ViolationCode::TextTooLong}));
  EXPECT_EQ(r[0].point_index, std::nullopt);
  EXPECT_EQ(r[1].point_index, 1u);
  EXPECT_EQ(r[2].point_index, 2u);
  EXPECT_EQ(r[3].point_index, 2u);
  EXPECT_EQ(r[4].point_index, 3u);
}

TEST(ValidateCard, TextLengthCountsCharactersAfterTrimming) {
  Lecture lecture = make_lecture(1);
  std::string at_limit(kMaxTextLength, 'a');
  EXPECT_TRUE(validate_card(spatial_card(lecture, {{1, 0.5, 0.5, "  " + at_limit + "  "}}), lecture).empty());
  // 2000 two-byte characters are still 2000 characters.
  std::string accented;
  for (std::size_t i = 0; i < kMaxTextLength; ++i) accented += "\xC3\xA9";
  EXPECT_TRUE(validate_card(spatial_card(lecture, {{1, 0.5, 0.5, accented}}), lecture).empty());
}

TEST(ValidateCard, ModeMismatch) {
  Lecture spatial = make_lecture(1);
  MuddyCard card = spatial_card(spatial, {{1, 0.5, 0.5, "x"}});
  card.free_text = "also text";
  EXPECT_EQ(codes(validate_card(card, spatial)), std::vector{ViolationCode::ModeMismatch});

  Lecture baseline = make_lecture(0, 1, 1, LectureMode::Baseline);
  MuddyCard b = testing::baseline_card(baseline, "the half in KE", ConfusionRating::SlightlyConfusing);
  EXPECT_TRUE(validate_card(b, baseline).empty());
  EXPECT_EQ(codes(validate_card(b, spatial)), std::vector{ViolationCode::ModeMismatch});
  b.points.push_back({1, 0.1, 0.1, "x"});
  EXPECT_EQ(codes(validate_card(b, baseline)), std::vector{ViolationCode::ModeMismatch});
}

TEST(ValidateCard, BaselineNeedsFreeText) {
  Lecture baseline = make_lecture(0, 1, 1, LectureMode::Baseline);
  MuddyCard b = testing::baseline_card(baseline, " \n ", ConfusionRating::SlightlyConfusing);
  EXPECT_EQ(codes(validate_card(b, baseline)), std::vector{ViolationCode::EmptyText});
  b.free_text.reset();
  EXPECT_EQ(codes(validate_card(b, baseline)), std::vector{ViolationCode::EmptyText});
}

TEST(ValidateCard, DeterministicOnRandomCards) {
  Lecture lecture = make_lecture(3);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-0.2, 1.2);
  std::uniform_int_distribution<int> slide(0, 4);
  std::uniform_int_distribution<int> n_points(0, 4);
  const std::vector<std::string> texts = {"", " ", "ok", "why?"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<MuddyPoint> points;
    for (int k = n_points(rng); k > 0; --k) {
      points.push_back({slide(rng), coord(rng), coord(rng), texts[rng() % texts.size()]});
    }
    MuddyCard card = spatial_card(lecture, points);
    if (rng() % 5 == 0) card.rating.reset();
    ValidationResult first = validate_card(card, lecture);
    EXPECT_EQ(first, validate_card(card, lecture));
  }
}

TEST(NormalizeCard, TrimsButKeepsInteriorWhitespace) {
  Lecture lecture = make_lecture(1);
  MuddyCard card = normalize_card(spatial_card(lecture, {{1, 0.5, 0.5, "  why   this \n"}}));
  EXPECT_EQ(card.points[0].text, "why   this");
}

TEST(MintId, UrlSafe128BitValues) {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    std::string id = mint_id();
    EXPECT_EQ(id.size(), 22u);
    for (char c : id) EXPECT_TRUE(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_');
    seen.insert(id);
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(ConstantTimeEqual, Basics) {
  EXPECT_TRUE(constant_time_equal("abc", "abc"));
  EXPECT_FALSE(constant_time_equal("abc", "abd"));
  EXPECT_FALSE(constant_time_equal("abc", "abcd"));
  EXPECT_FALSE(constant_time_equal("", "a"));
  EXPECT_TRUE(constant_time_equal("", ""));
}

TEST(Timestamp, FormatsAndParsesRfc3339) {
  Timestamp ts = parse_timestamp("2024-05-01T12:30:00.250Z");
  EXPECT_EQ(format_timestamp(ts), "2024-05-01T12:30:00.250Z");
  EXPECT_EQ(parse_timestamp("2024-05-01T14:30:00.25+02:00"), ts);
  EXPECT_EQ(parse_timestamp("2024-05-01T12:30:00Z"), ts - std::chrono::milliseconds(250));
  EXPECT_EQ(format_timestamp(Timestamp{}), "1970-01-01T00:00:00.000Z");
  for (const char* bad : {"2024-05-01", "2024-13-01T00:00:00Z", "2024-05-01T12:30:00", "x"}) {
    EXPECT_THROW(parse_timestamp(bad), Error) << bad;
  }
}

TEST(Timestamp, RoundTripsNow) {
  Timestamp now = now_utc();
  EXPECT_EQ(parse_timestamp(format_timestamp(now)), now);
}

}  // namespace
}  // namespace mudslide
