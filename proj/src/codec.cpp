#include "mudslide/codec.hpp"

#include <algorithm>

namespace mudslide {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::Malformed, "malformed record: " + what);
}

const Json& field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

int int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) malformed(std::string("field '") + name + "' must be an integer");
  return v.get<int>();
}

double number_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) malformed(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json card_to_json(const MuddyCard& card) {
  Json points = Json::array();
  for (const MuddyPoint& p : card.points) {
    points.push_back({{"slide", p.slide_index}, {"x", p.x}, {"y", p.y}, {"text", p.text}});
  }
  return Json{
      {"card_id", card.card_id},
      {"lecture_id", card.lecture_id},
      {"mode", to_string(card.mode)},
      {"rating", card.rating ? Json(canonical_label(*card.rating)) : Json(nullptr)},
      {"points", std::move(points)},
      {"free_text", card.free_text ? Json(*card.free_text) : Json(nullptr)},
      {"submitted_at", format_timestamp(card.submitted_at)},
  };
}

MuddyCard card_from_json(const Json& j) {
  if (!j.is_object()) malformed("record must be an object");
  MuddyCard card;
  card.card_id = string_field(j, "card_id");
  card.lecture_id = string_field(j, "lecture_id");
  try {
    card.mode = parse_mode(string_field(j, "mode"));
    const Json& rating = field(j, "rating");
    if (rating.is_string()) {
      card.rating = parse_rating(rating.get<std::string>());
    } else if (!rating.is_null()) {
      malformed("field 'rating' must be a string or null");
    }
    card.submitted_at = parse_timestamp(string_field(j, "submitted_at"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Malformed) throw;
    malformed(e.what());
  }
  const Json& points = field(j, "points");
  if (!points.is_array()) malformed("field 'points' must be an array");
  for (const Json& p : points) {
    if (!p.is_object()) malformed("point must be an object");
    card.points.push_back(MuddyPoint{int_field(p, "slide"), number_field(p, "x"),
                                     number_field(p, "y"), string_field(p, "text")});
  }
  const Json& free_text = field(j, "free_text");
  if (free_text.is_string()) {
    card.free_text = free_text.get<std::string>();
  } else if (!free_text.is_null()) {
    malformed("field 'free_text' must be a string or null");
  }
  return card;
}

std::string card_to_line(const MuddyCard& card) { return card_to_json(card).dump(); }

MuddyCard card_from_line(std::string_view line) {
  Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) malformed("not valid JSON");
  return card_from_json(j);
}

Json lecture_to_json(const Lecture& lecture) {
  Json slides = Json::array();
  for (const Slide& s : lecture.slides) {
    slides.push_back(
        {{"index", s.index}, {"file", s.image_file}, {"width", s.width}, {"height", s.height}});
  }
  return Json{
      {"lecture_id", lecture.lecture_id},
      {"title", lecture.title},
      {"mode", to_string(lecture.mode)},
      {"slides", std::move(slides)},
      {"student_token", lecture.student_token},
      {"teacher_token", lecture.teacher_token},
      {"created_at", format_timestamp(lecture.created_at)},
  };
}

Lecture lecture_from_json(const Json& j) {
  if (!j.is_object()) malformed("manifest must be an object");
  Lecture lecture;
  lecture.lecture_id = string_field(j, "lecture_id");
  lecture.title = string_field(j, "title");
  try {
    lecture.mode = parse_mode(string_field(j, "mode"));
  } catch (const Error& e) {
    malformed(e.what());
  }
  lecture.student_token = string_field(j, "student_token");
  lecture.teacher_token = string_field(j, "teacher_token");
  lecture.created_at = parse_timestamp(string_field(j, "created_at"));
  const Json& slides = field(j, "slides");
  if (!slides.is_array()) malformed("field 'slides' must be an array");
  for (const Json& s : slides) {
    lecture.slides.push_back(Slide{int_field(s, "index"), string_field(s, "file"),
                                   int_field(s, "width"), int_field(s, "height")});
  }
  return lecture;
}

Json violations_to_json(const ValidationResult& violations) {
  Json out = Json::array();
  for (const Violation& v : violations) {
    out.push_back({{"code", to_string(v.code)},
                   {"point_index", v.point_index ? Json(*v.point_index) : Json(nullptr)},
                   {"detail", v.detail}});
  }
  return out;
}

CardPayload card_from_payload(const Json& body, const Lecture& lecture) {
  CardPayload out;
  MuddyCard& card = out.card;
  card.lecture_id = lecture.lecture_id;
  card.mode = lecture.mode;
  auto problem = [&out](ViolationCode code, std::optional<std::size_t> index, std::string detail) {
    out.problems.push_back(Violation{code, index, std::move(detail)});
  };

  if (!body.is_object()) {
    problem(ViolationCode::Malformed, std::nullopt, "request body must be a JSON object");
    return out;
  }

  if (auto it = body.find("mode"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) {
      problem(ViolationCode::Malformed, std::nullopt, "'mode' must be a string");
    } else {
      try {
        card.mode = parse_mode(it->get<std::string>());
      } catch (const Error& e) {
        problem(ViolationCode::ModeMismatch, std::nullopt, e.what());
      }
    }
  }

  if (auto it = body.find("rating"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) {
      problem(ViolationCode::Malformed, std::nullopt, "'rating' must be a string");
    } else {
      try {
        card.rating = parse_rating(it->get<std::string>());
      } catch (const Error& e) {
        // Reported by validate_card as MissingRating; keep the reason.
        problem(ViolationCode::MissingRating, std::nullopt, e.what());
      }
    }
  }

  if (auto it = body.find("points"); it != body.end() && !it->is_null()) {
    if (!it->is_array()) {
      problem(ViolationCode::Malformed, std::nullopt, "'points' must be an array");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const Json& p = (*it)[i];
        MuddyPoint point;
        bool ok = p.is_object();
        if (ok) {
          auto slide = p.find("slide");
          auto x = p.find("x");
          auto y = p.find("y");
          auto text = p.find("text");
          ok = slide != p.end() && slide->is_number_integer() && x != p.end() &&
               x->is_number() && y != p.end() && y->is_number() &&
               (text == p.end() || text->is_string() || text->is_null());
          if (ok) {
            point.slide_index = slide->get<int>();
            point.x = x->get<double>();
            point.y = y->get<double>();
            if (text != p.end() && text->is_string()) point.text = text->get<std::string>();
          }
        }
        if (!ok) {
          problem(ViolationCode::Malformed, i,
                  "point needs integer 'slide', numeric 'x' and 'y', string 'text'");
          continue;
        }
        card.points.push_back(std::move(point));
        out.point_origin.push_back(i);
      }
    }
  }

  if (auto it = body.find("free_text"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) {
      problem(ViolationCode::Malformed, std::nullopt, "'free_text' must be a string");
    } else {
      card.free_text = it->get<std::string>();
    }
  }
  return out;
}

ValidationResult payload_violations(const CardPayload& payload, const Lecture& lecture) {
  ValidationResult out = payload.problems;
  bool rating_reported = std::any_of(out.begin(), out.end(), [](const Violation& v) {
    return v.code == ViolationCode::MissingRating;
  });
  for (Violation v : validate_card(payload.card, lecture)) {
    if (v.code == ViolationCode::MissingRating && rating_reported) continue;
    if (v.point_index && *v.point_index < payload.point_origin.size()) {
      v.point_index = payload.point_origin[*v.point_index];
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mudslide
