#include "mudslide/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <cstdio>

namespace mudslide {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownRating: return "UnknownRating";
    case ErrorCode::UnknownMode: return "UnknownMode";
    case ErrorCode::InvalidRoot: return "InvalidRoot";
    case ErrorCode::InvalidOptions: return "InvalidOptions";
    case ErrorCode::BadSlideIndex: return "BadSlideIndex";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::UnreadableImage: return "UnreadableImage";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownLecture: return "UnknownLecture";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::CapacityReached: return "CapacityReached";
    case ErrorCode::Malformed: return "Malformed";
  }
  return "Unknown";
}

std::string_view canonical_label(ConfusionRating rating) {
  switch (rating) {
    case ConfusionRating::ExtremelyConfusing: return "extremely_confusing";
    case ConfusionRating::ModeratelyConfusing: return "moderately_confusing";
    case ConfusionRating::SlightlyConfusing: return "slightly_confusing";
    case ConfusionRating::NotConfusing: return "not_confusing";
  }
  return "not_confusing";
}

std::string_view display_label(ConfusionRating rating) {
  switch (rating) {
    case ConfusionRating::ExtremelyConfusing: return "extremely confusing";
    case ConfusionRating::ModeratelyConfusing: return "moderately confusing";
    case ConfusionRating::SlightlyConfusing: return "slightly confusing";
    case ConfusionRating::NotConfusing: return "not confusing";
  }
  return "not confusing";
}

ConfusionRating parse_rating(std::string_view label) {
  std::string normalized;
  normalized.reserve(label.size());
  for (char c : label) {
    normalized.push_back(c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (ConfusionRating r : kAllRatings) {
    if (normalized == canonical_label(r)) return r;
  }
  throw Error(ErrorCode::UnknownRating, "unknown confusion rating '" + std::string(label) + "'");
}

std::string_view to_string(LectureMode mode) {
  return mode == LectureMode::Spatial ? "spatial" : "baseline";
}

LectureMode parse_mode(std::string_view text) {
  if (text == "spatial") return LectureMode::Spatial;
  if (text == "baseline") return LectureMode::Baseline;
  throw Error(ErrorCode::UnknownMode, "unknown lecture mode '" + std::string(text) + "'");
}

std::string_view to_string(Role role) { return role == Role::Student ? "student" : "teacher"; }

const Slide* Lecture::find_slide(int index) const {
  auto it = std::find_if(slides.begin(), slides.end(),
                         [index](const Slide& s) { return s.index == index; });
  return it == slides.end() ? nullptr : &*it;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::NoPoints: return "NoPoints";
    case ViolationCode::EmptyText: return "EmptyText";
    case ViolationCode::CoordOutOfRange: return "CoordOutOfRange";
    case ViolationCode::BadSlideIndex: return "BadSlideIndex";
    case ViolationCode::MissingRating: return "MissingRating";
    case ViolationCode::ModeMismatch: return "ModeMismatch";
    case ViolationCode::TextTooLong: return "TextTooLong";
    case ViolationCode::Malformed: return "Malformed";
  }
  return "Malformed";
}

namespace {

// Decodes one code point starting at `pos`; malformed sequences decode as a
// single byte so that they are never mistaken for whitespace.
char32_t decode_at(std::string_view s, std::size_t pos, std::size_t& len) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  unsigned char b0 = byte(pos);
  auto continuation = [&](std::size_t n) {
    for (std::size_t i = 1; i <= n; ++i) {
      if (pos + i >= s.size() || (byte(pos + i) & 0xC0) != 0x80) return false;
    }
    return true;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && continuation(1)) {
    len = 2;
    return (char32_t(b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
  }
  if ((b0 & 0xF0) == 0xE0 && continuation(2)) {
    len = 3;
    return (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(pos + 1) & 0x3F) << 6) |
           (byte(pos + 2) & 0x3F);
  }
  if ((b0 & 0xF8) == 0xF0 && continuation(3)) {
    len = 4;
    return (char32_t(b0 & 0x07) << 18) | (char32_t(byte(pos + 1) & 0x3F) << 12) |
           (char32_t(byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
  }
  len = 1;
  return 0xFFFD;
}

// Unicode White_Space property.
bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

}  // namespace

std::string trim_text(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool seen_content = false;
  for (std::size_t pos = 0, len = 0; pos < text.size(); pos += len) {
    char32_t c = decode_at(text, pos, len);
    if (!is_unicode_space(c)) {
      if (!seen_content) begin = pos;
      seen_content = true;
      end = pos + len;
    }
  }
  if (!seen_content) return {};
  return std::string(text.substr(begin, end - begin));
}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = 0, len = 0; pos < text.size(); pos += len) {
    decode_at(text, pos, len);
    ++count;
  }
  return count;
}

ValidationResult validate_card(const MuddyCard& card, const Lecture& lecture) {
  ValidationResult out;
  auto add = [&out](ViolationCode code, std::optional<std::size_t> index, std::string detail) {
    out.push_back(Violation{code, index, std::move(detail)});
  };

  if (card.mode != lecture.mode) {
    add(ViolationCode::ModeMismatch, std::nullopt,
        "card mode '" + std::string(to_string(card.mode)) + "' does not match lecture mode '" +
            std::string(to_string(lecture.mode)) + "'");
  }
  if (!card.rating) add(ViolationCode::MissingRating, std::nullopt, "a lecture rating is required");

  auto check_text = [&](std::string_view text, std::optional<std::size_t> index) {
    std::string trimmed = trim_text(text);
    if (trimmed.empty()) {
      add(ViolationCode::EmptyText, index, "an explanation is required");
    } else if (utf8_length(trimmed) > kMaxTextLength) {
      add(ViolationCode::TextTooLong, index,
          "text exceeds " + std::to_string(kMaxTextLength) + " characters");
    }
  };

  if (card.mode == LectureMode::Spatial) {
    if (card.free_text) {
      add(ViolationCode::ModeMismatch, std::nullopt, "spatial cards carry no free text");
    }
    if (card.points.empty()) {
      add(ViolationCode::NoPoints, std::nullopt, "at least one muddy point is required");
    }
    for (std::size_t i = 0; i < card.points.size(); ++i) {
      const MuddyPoint& p = card.points[i];
      if (lecture.find_slide(p.slide_index) == nullptr) {
        add(ViolationCode::BadSlideIndex, i,
            "slide " + std::to_string(p.slide_index) + " is not part of this lecture");
      }
      // Negated form so NaN is rejected.
      if (!(p.x >= 0.0 && p.x <= 1.0) || !(p.y >= 0.0 && p.y <= 1.0)) {
        add(ViolationCode::CoordOutOfRange, i, "coordinates must lie in [0, 1]");
      }
      check_text(p.text, i);
    }
  } else {
    if (!card.points.empty()) {
      add(ViolationCode::ModeMismatch, std::nullopt, "baseline cards carry no muddy points");
    }
    check_text(card.free_text.value_or(std::string{}), std::nullopt);
  }
  return out;
}

MuddyCard normalize_card(MuddyCard card) {
  for (MuddyPoint& p : card.points) p.text = trim_text(p.text);
  if (card.free_text) card.free_text = trim_text(*card.free_text);
  return card;
}

std::string mint_id() {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::random_device rd;
  std::array<unsigned char, 16> bytes{};
  for (std::size_t i = 0; i < bytes.size(); i += 4) {
    std::uint32_t v = rd();
    for (std::size_t j = 0; j < 4; ++j) bytes[i + j] = static_cast<unsigned char>(v >> (8 * j));
  }
  std::string out;
  out.reserve(22);
  std::uint32_t acc = 0;
  int bits = 0;
  for (unsigned char b : bytes) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out.push_back(kAlphabet[(acc >> bits) & 0x3F]);
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(acc << (6 - bits)) & 0x3F]);
  return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  std::size_t n = std::max(a.size(), b.size());
  unsigned diff = static_cast<unsigned>(a.size() ^ b.size());
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char ca = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    unsigned char cb = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned>(ca ^ cb);
  }
  return diff == 0;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day = floor<days>(ts);
  year_month_day ymd{day};
  hh_mm_ss<milliseconds> tod{ts - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(tod.hours().count()),
                long(tod.minutes().count()), long(tod.seconds().count()),
                long(tod.subseconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&]() -> Timestamp {
    throw Error(ErrorCode::Malformed, "invalid RFC 3339 timestamp '" + std::string(text) + "'");
  };
  std::size_t pos = 0;
  auto digits = [&](std::size_t n, int& value) {
    if (pos + n > text.size()) return false;
    value = 0;
    for (std::size_t i = 0; i < n; ++i) {
      char c = text[pos + i];
      if (c < '0' || c > '9') return false;
      value = value * 10 + (c - '0');
    }
    pos += n;
    return true;
  };
  auto expect = [&](std::string_view options) {
    if (pos < text.size() && options.find(text[pos]) != std::string_view::npos) {
      ++pos;
      return true;
    }
    return false;
  };
  int y, mo, d, h, mi, s;
  if (!digits(4, y) || !expect("-") || !digits(2, mo) || !expect("-") || !digits(2, d) ||
      !expect("Tt") || !digits(2, h) || !expect(":") || !digits(2, mi) || !expect(":") ||
      !digits(2, s)) {
    return fail();
  }
  long millis = 0;
  if (expect(".")) {
    std::size_t start = pos;
    long scale = 100;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) return fail();
  }
  minutes offset{0};
  if (expect("Zz")) {
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    int oh, om;
    if (!digits(2, oh) || !expect(":") || !digits(2, om)) return fail();
    offset = minutes(sign * (oh * 60 + om));
  } else {
    return fail();
  }
  if (pos != text.size()) return fail();
  year_month_day ymd{year(y), month(unsigned(mo)), day(unsigned(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return fail();
  return Timestamp{sys_days(ymd).time_since_epoch() + hours(h) + minutes(mi) + seconds(s) +
                   milliseconds(millis) - offset};
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace mudslide
