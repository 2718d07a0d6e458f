#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mudslide/core.hpp"

namespace mudslide {

using Json = nlohmann::json;

// Card log record:
// {"card_id","lecture_id","mode","rating","points":[{"slide","x","y","text"}],
//  "free_text","submitted_at"}
Json card_to_json(const MuddyCard& card);
// Strict: every field present with the right type. Throws Error(Malformed).
MuddyCard card_from_json(const Json& j);
// Compact single-line record, no trailing newline.
std::string card_to_line(const MuddyCard& card);
MuddyCard card_from_line(std::string_view line);

Json lecture_to_json(const Lecture& lecture);
Lecture lecture_from_json(const Json& j);

Json violations_to_json(const ValidationResult& violations);

// Decodes a student submission body ({"rating","points","free_text","mode"?}).
// Mode defaults to the lecture's. Structural problems that prevent building
// a card field (wrong JSON types, unknown rating label) are returned as
// violations rather than thrown so that one response can list everything.
struct CardPayload {
  MuddyCard card;
  ValidationResult problems;
  // Index in the request's "points" array of each decoded card point.
  std::vector<std::size_t> point_origin;
};
// problems followed by validate_card(card), with point indices mapped back
// to the request's array and without a duplicate MissingRating.
ValidationResult payload_violations(const CardPayload& payload, const Lecture& lecture);
CardPayload card_from_payload(const Json& body, const Lecture& lecture);

}  // namespace mudslide
