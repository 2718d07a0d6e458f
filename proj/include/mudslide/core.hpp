#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudslide/error.hpp"

namespace mudslide {

// Holistic clarity judgment attached to every card. Enumerator order is the
// confusion order: a larger underlying value means more confusing.
enum class ConfusionRating : std::uint8_t {
  NotConfusing = 0,
  SlightlyConfusing = 1,
  ModeratelyConfusing = 2,
  ExtremelyConfusing = 3,
};

// Most confusing first.
inline constexpr std::array<ConfusionRating, 4> kAllRatings = {
    ConfusionRating::ExtremelyConfusing, ConfusionRating::ModeratelyConfusing,
    ConfusionRating::SlightlyConfusing, ConfusionRating::NotConfusing};

constexpr std::size_t ordinal(ConfusionRating r) { return static_cast<std::size_t>(r); }

// Wire label, e.g. "not_confusing".
std::string_view canonical_label(ConfusionRating rating);
// Human label, e.g. "not confusing".
std::string_view display_label(ConfusionRating rating);
// Case-insensitive; accepts '_' or ' ' as the word separator. Throws
// Error(UnknownRating) for anything outside the four-value vocabulary.
ConfusionRating parse_rating(std::string_view label);

enum class LectureMode { Spatial, Baseline };
std::string_view to_string(LectureMode mode);
LectureMode parse_mode(std::string_view text);

enum class Role { Student, Teacher };
std::string_view to_string(Role role);

struct AccessToken {
  std::string value;
  Role role = Role::Student;
};

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

struct Slide {
  int index = 0;  // 1-based
  std::string image_file;
  int width = 0;
  int height = 0;

  bool operator==(const Slide&) const = default;
};

struct Lecture {
  std::string lecture_id;
  std::string title;
  LectureMode mode = LectureMode::Spatial;
  std::vector<Slide> slides;
  std::string student_token;
  std::string teacher_token;
  Timestamp created_at{};

  const Slide* find_slide(int index) const;
  bool operator==(const Lecture&) const = default;
};

struct MuddyPoint {
  int slide_index = 0;
  double x = 0.0;  // fraction of slide width
  double y = 0.0;  // fraction of slide height
  std::string text;

  bool operator==(const MuddyPoint&) const = default;
};

struct MuddyCard {
  std::string card_id;
  std::string lecture_id;
  LectureMode mode = LectureMode::Spatial;
  std::optional<ConfusionRating> rating;
  std::vector<MuddyPoint> points;      // Spatial mode only
  std::optional<std::string> free_text;  // Baseline mode only
  Timestamp submitted_at{};

  bool operator==(const MuddyCard&) const = default;
};

enum class ViolationCode {
  NoPoints,
  EmptyText,
  CoordOutOfRange,
  BadSlideIndex,
  MissingRating,
  ModeMismatch,
  TextTooLong,
  Malformed,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::optional<std::size_t> point_index;  // offending point, when there is one
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Empty means the card is acceptable.
using ValidationResult = std::vector<Violation>;

// Measured in code points after trimming.
inline constexpr std::size_t kMaxTextLength = 2000;

// Reports every violated card invariant against `lecture`, in a fixed order:
// card-level problems first, then per point in point order.
ValidationResult validate_card(const MuddyCard& card, const Lecture& lecture);

// Returns a copy with every point text and the free text trimmed.
MuddyCard normalize_card(MuddyCard card);

// Strips leading/trailing Unicode whitespace from UTF-8 text.
std::string trim_text(std::string_view text);
std::size_t utf8_length(std::string_view text);

// 128 random bits, base64url without padding (22 characters).
std::string mint_id();

bool constant_time_equal(std::string_view a, std::string_view b);

// RFC 3339 in UTC with millisecond precision: 2024-05-01T12:30:00.250Z
std::string format_timestamp(Timestamp ts);
// Accepts 'Z' or a numeric offset and any number of fractional digits.
Timestamp parse_timestamp(std::string_view text);
Timestamp now_utc();

}  // namespace mudslide

namespace mudslide {

// Raised when a card is rejected. line_no is the 1-based input line for
// imports and 0 otherwise.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line_no, ValidationResult violations)
      : Error(ErrorCode::ValidationFailed, describe(line_no, violations)),
        line_no_(line_no),
        violations_(std::move(violations)) {}

  std::size_t line_no() const noexcept { return line_no_; }
  const ValidationResult& violations() const noexcept { return violations_; }

 private:
  static std::string describe(std::size_t line_no, const ValidationResult& violations) {
    std::string msg = "card rejected";
    if (line_no > 0) msg += " at line " + std::to_string(line_no);
    msg += ":";
    for (const Violation& v : violations) {
      msg += " ";
      msg += to_string(v.code);
    }
    return msg;
  }

  std::size_t line_no_;
  ValidationResult violations_;
};

}  // namespace mudslide
