#include "mudslide/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace mudslide {

namespace {

constexpr std::string_view kSpatialInstructions =
    "Double-click the spot on a slide that confused you most, then explain what was unclear. "
    "The teacher will see where you clicked. Mark as many spots as you need.";
constexpr std::string_view kBaselineInstructions =
    "Describe the part of this lecture that was least clear to you.";
constexpr std::string_view kRatingPrompt = "This lecture was:";

HttpResponse json_response(int status, const Json& body) {
  return HttpResponse{status, "application/json", body.dump()};
}

HttpResponse error_response(int status, std::string_view error, std::string_view detail = {}) {
  Json body{{"error", error}};
  if (!detail.empty()) body["detail"] = detail;
  return json_response(status, body);
}

HttpResponse not_found() { return error_response(404, "not_found"); }
HttpResponse forbidden() { return error_response(403, "forbidden"); }

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    auto slash = path.find('/');
    out.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if ((u >= 'A' && u <= 'Z') || (u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u == '-' ||
        u == '_' || u == '.' || u == '~') {
      out.push_back(c);
    } else {
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 0xF]);
    }
  }
  return out;
}

std::string slide_url(const Lecture& lecture, const Slide& slide, std::string_view token) {
  return "/api/slides/" + url_encode(lecture.lecture_id) + "/" + url_encode(slide.image_file) +
         "?token=" + url_encode(token);
}

std::optional<std::string> query_value(const std::map<std::string, std::string>& query,
                                       const std::string& key) {
  auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidOptions, "'" + key + "' must be a number");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text, std::size_t lo,
                        std::size_t hi) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || v < lo || v > hi) {
    throw Error(ErrorCode::InvalidOptions, "'" + key + "' must be an integer in [" +
                                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::InvalidOptions, "'" + key + "' must be true or false");
}

std::optional<int> parse_slide_index(std::string_view text) {
  int v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return v;
}

bool is_loopback(std::string_view addr) {
  return addr == "127.0.0.1" || addr == "::1" || addr == "::ffff:127.0.0.1" ||
         addr.starts_with("127.");
}

std::string content_type_for(const fs::path& file) {
  std::string ext = file.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

std::optional<std::string> read_binary(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Comment texts feeding the histogram and word tree: spatial point texts by
// slide, or baseline free texts.
std::vector<std::string> corpus_of(const std::vector<MuddyCard>& cards, const Lecture& lecture) {
  std::vector<std::string> corpus;
  if (lecture.mode == LectureMode::Spatial) {
    for (const Slide& slide : lecture.slides) {
      for (SlideComment& c : slide_comments(slide.index, cards, lecture)) {
        corpus.push_back(std::move(c.text));
      }
    }
  } else {
    for (const MuddyCard& card : cards) {
      if (card.free_text) corpus.push_back(*card.free_text);
    }
  }
  return corpus;
}

Json rating_json(ConfusionRating r) { return Json(canonical_label(r)); }

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig config;
  if (const char* key = std::getenv("MUDSLIDE_ADMIN_KEY")) config.admin_key = key;
  if (const char* cap = std::getenv("MUDSLIDE_MAX_CARDS_PER_TOKEN")) {
    config.max_cards_per_token =
        parse_count("MUDSLIDE_MAX_CARDS_PER_TOKEN", cap, 0, std::size_t(1) << 40);
  }
  if (const char* file = std::getenv("MUDSLIDE_STOPWORDS"); file && *file) {
    config.stopwords = load_stopwords(file);
  }
  return config;
}

HeatmapOptions heatmap_options_from_query(const std::map<std::string, std::string>& query) {
  HeatmapOptions opts;
  if (auto v = query_value(query, "radius_frac")) opts.radius_frac = parse_double("radius_frac", *v);
  if (auto v = query_value(query, "opacity")) opts.opacity = parse_double("opacity", *v);
  if (auto v = query_value(query, "color_mode")) opts.color_mode = parse_color_mode(*v);
  if (auto v = query_value(query, "visible")) opts.visible = parse_bool("visible", *v);
  opts.validate();
  return opts;
}

WordTreeOptions word_tree_options_from_query(const std::map<std::string, std::string>& query) {
  WordTreeOptions opts;
  if (auto v = query_value(query, "max_depth")) opts.max_depth = parse_count("max_depth", *v, 1, 50);
  if (auto v = query_value(query, "min_count")) {
    opts.min_count = parse_count("min_count", *v, 1, std::size_t(1) << 40);
  }
  return opts;
}

Json to_json(const SummaryStats& stats) {
  Json histogram = Json::object();
  for (ConfusionRating r : kAllRatings) {
    histogram[std::string(canonical_label(r))] = stats.rating_histogram[ordinal(r)];
  }
  return Json{
      {"card_count", stats.card_count},
      {"point_count", stats.point_count},
      {"points_per_card_mean", stats.points_per_card_mean},
      {"rating_histogram", std::move(histogram)},
      {"featured_slide", stats.featured_slide ? Json(*stats.featured_slide) : Json(nullptr)},
  };
}

Json to_json(const Histogram& histogram) {
  Json out = Json::array();
  for (const HistogramEntry& e : histogram.entries) {
    out.push_back({{"token", e.token}, {"count", e.count}});
  }
  return out;
}

Json to_json(const WordTreeNode& node) {
  Json children = Json::array();
  for (const WordTreeNode& child : node.children) children.push_back(to_json(child));
  return Json{{"token", node.token},
              {"count", node.count},
              {"terminal_count", node.terminal_count},
              {"children", std::move(children)}};
}

Json to_json(const WordTree& tree) {
  return Json{{"root_token", tree.root_token},
              {"root_count", tree.root_count},
              {"max_depth", tree.options.max_depth},
              {"min_count", tree.options.min_count},
              {"tree", to_json(tree.root)}};
}

Service::Service(Store& store, ServiceConfig config) : store_(store), config_(std::move(config)) {}

std::string Service::student_view_url(const Lecture& lecture, std::string_view base_url) {
  return std::string(base_url) + "/s/" + lecture.student_token;
}

std::string Service::teacher_view_url(const Lecture& lecture, std::string_view base_url) {
  return std::string(base_url) + "/t/" + lecture.teacher_token;
}

std::optional<ResolvedAccess> Service::resolve_token(std::string_view token) const {
  auto match = store_.find_token(token);
  if (!match) return std::nullopt;
  return ResolvedAccess{match->lecture_id, match->role};
}

Json Service::student_view(const Lecture& lecture) const {
  Json slides = Json::array();
  if (lecture.mode == LectureMode::Spatial) {
    for (const Slide& s : lecture.slides) {
      slides.push_back({{"index", s.index},
                        {"image_url", slide_url(lecture, s, lecture.student_token)},
                        {"width", s.width},
                        {"height", s.height}});
    }
  }
  Json ratings = Json::array();
  for (ConfusionRating r : kAllRatings) {
    ratings.push_back({{"value", canonical_label(r)}, {"label", display_label(r)}});
  }
  bool spatial = lecture.mode == LectureMode::Spatial;
  return Json{
      {"title", lecture.title},
      {"mode", to_string(lecture.mode)},
      {"spatial_input", spatial},
      {"instructions", spatial ? kSpatialInstructions : kBaselineInstructions},
      {"rating_prompt", kRatingPrompt},
      {"ratings", std::move(ratings)},
      {"slides", std::move(slides)},
      {"max_text_length", kMaxTextLength},
  };
}

Json Service::teacher_summary(const Lecture& lecture,
                              const std::map<std::string, std::string>& query) const {
  HeatmapOptions heatmap = heatmap_options_from_query(query);
  WordTreeOptions tree_opts = word_tree_options_from_query(query);
  std::size_t top_n = config_.histogram_top_n;
  if (auto v = query_value(query, "top_n")) top_n = parse_count("top_n", *v, 1, 1000);

  const std::vector<MuddyCard> cards = store_.snapshot_cards(lecture.lecture_id);
  const SummaryStats stats = summary(cards, lecture);

  Json slides = Json::array();
  Json comments = Json::array();
  if (lecture.mode == LectureMode::Spatial) {
    SlideAggregates aggregates = points_by_slide(cards, lecture, heatmap.color_mode);
    std::vector<int> order;
    if (stats.featured_slide) order.push_back(*stats.featured_slide);
    for (const Slide& s : lecture.slides) {
      if (s.index != stats.featured_slide) order.push_back(s.index);
    }
    for (int index : order) {
      const Slide& slide = *lecture.find_slide(index);
      const SlideAggregate& agg = aggregates.at(index);
      Json points = Json::array();
      for (const PlacedPoint& p : agg.points) {
        points.push_back({{"card_id", p.card_id},
                          {"x", p.point.x},
                          {"y", p.point.y},
                          {"text", p.point.text},
                          {"rating", rating_json(p.rating)},
                          {"color_class", to_string(p.color_class)},
                          {"fill", heatmap.palette.fill(p.color_class)}});
      }
      slides.push_back({{"slide_index", index},
                        {"image_url", slide_url(lecture, slide, lecture.teacher_token)},
                        {"heatmap_url", "/api/t/" + url_encode(lecture.teacher_token) +
                                            "/heatmap/" + std::to_string(index) + ".svg"},
                        {"width", slide.width},
                        {"height", slide.height},
                        {"point_count", agg.point_count},
                        {"share", agg.share},
                        {"featured", stats.featured_slide == index},
                        {"points", std::move(points)}});
    }
    for (const Slide& s : lecture.slides) {
      for (const SlideComment& c : slide_comments(s.index, cards, lecture)) {
        comments.push_back(
            {{"slide", s.index}, {"text", c.text}, {"rating", rating_json(c.rating)}, {"card_id", c.card_id}});
      }
    }
  } else {
    for (const BaselineComment& c : baseline_comments(cards)) {
      comments.push_back(
          {{"text", c.free_text}, {"rating", rating_json(c.rating)}, {"card_id", c.card_id}});
    }
  }

  const std::vector<std::string> corpus = corpus_of(cards, lecture);
  const Histogram histogram = word_histogram(corpus, config_.stopwords, top_n);
  std::optional<std::string> root = query_value(query, "root");
  if (!root) root = default_root(histogram);
  Json tree = root ? to_json(build_word_tree(corpus, *root, tree_opts)) : Json(nullptr);

  return Json{
      {"lecture",
       {{"lecture_id", lecture.lecture_id}, {"title", lecture.title}, {"mode", to_string(lecture.mode)}}},
      {"summary", to_json(stats)},
      {"heatmap",
       {{"radius_frac", heatmap.radius_frac},
        {"opacity", heatmap.opacity},
        {"color_mode", to_string(heatmap.color_mode)},
        {"visible", heatmap.visible}}},
      {"slides", std::move(slides)},
      {"comments", std::move(comments)},
      {"histogram", to_json(histogram)},
      {"word_tree", std::move(tree)},
  };
}

HttpResponse Service::handle(const HttpRequest& request) const {
  try {
    return route(request);
  } catch (const ValidationError& e) {
    return json_response(422, Json{{"error", "validation_failed"},
                                   {"violations", violations_to_json(e.violations())}});
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::UnknownLecture:
      case ErrorCode::BadSlideIndex:
        return not_found();
      case ErrorCode::InvalidOptions:
      case ErrorCode::InvalidRoot:
      case ErrorCode::UnknownMode:
      case ErrorCode::EmptyGallery:
      case ErrorCode::UnreadableImage:
      case ErrorCode::Malformed:
        return error_response(422, to_string(e.code()), e.what());
      case ErrorCode::CapacityReached:
        return error_response(429, to_string(e.code()), e.what());
      default:
        return error_response(500, to_string(e.code()), e.what());
    }
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::route(const HttpRequest& request) const {
  const std::vector<std::string_view> seg = split_path(request.path);
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";

  if (seg.size() == 2 && (seg[0] == "s" || seg[0] == "t") && get) {
    return static_page(seg[1], seg[0] == "s" ? Role::Student : Role::Teacher);
  }
  if (seg.empty() || seg[0] != "api") return not_found();

  if (seg.size() == 2 && seg[1] == "lectures" && post) return create_lecture(request);
  if (seg.size() == 4 && seg[1] == "slides" && get) return slide_image(seg[2], seg[3], request);

  if (seg.size() < 3 || (seg[1] != "s" && seg[1] != "t")) return not_found();
  const Role route_role = seg[1] == "s" ? Role::Student : Role::Teacher;
  const std::vector<std::string_view> rest(seg.begin() + 3, seg.end());

  // Reject unknown route shapes before looking at the token.
  bool known = false;
  if (route_role == Role::Student) {
    known = (rest.empty() && get) || (rest.size() == 1 && rest[0] == "cards" && post);
  } else if (get) {
    known = (rest.size() == 1 &&
             (rest[0] == "summary" || rest[0] == "wordtree" || rest[0] == "export.jsonl")) ||
            (rest.size() == 3 && rest[0] == "slides" && rest[2] == "comments") ||
            (rest.size() == 2 && rest[0] == "heatmap" && rest[1].ends_with(".svg"));
  }
  if (!known) return not_found();

  auto access = resolve_token(seg[2]);
  if (!access) return not_found();
  if (access->role != route_role) return forbidden();
  const Lecture lecture = store_.lecture(access->lecture_id);

  if (route_role == Role::Student) {
    if (rest.empty()) return json_response(200, student_view(lecture));
    return submit(lecture, request);
  }

  if (rest[0] == "summary") return json_response(200, teacher_summary(lecture, request.query));

  if (rest[0] == "export.jsonl") {
    return HttpResponse{200, "application/x-ndjson", store_.export_jsonl(lecture.lecture_id)};
  }

  if (rest[0] == "wordtree") {
    WordTreeOptions opts = word_tree_options_from_query(request.query);
    const std::vector<MuddyCard> cards = store_.snapshot_cards(lecture.lecture_id);
    const std::vector<std::string> corpus = corpus_of(cards, lecture);
    std::optional<std::string> root = query_value(request.query, "root");
    if (!root) root = default_root(word_histogram(corpus, config_.stopwords, 1));
    return json_response(200, root ? to_json(build_word_tree(corpus, *root, opts)) : Json(nullptr));
  }

  if (rest[0] == "slides") {
    auto index = parse_slide_index(rest[1]);
    if (!index || lecture.mode != LectureMode::Spatial) return not_found();
    const std::vector<MuddyCard> cards = store_.snapshot_cards(lecture.lecture_id);
    Json out = Json::array();
    for (const SlideComment& c : slide_comments(*index, cards, lecture)) {
      out.push_back({{"text", c.text}, {"rating", rating_json(c.rating)}, {"card_id", c.card_id}});
    }
    return json_response(200, Json{{"slide_index", *index}, {"comments", std::move(out)}});
  }

  // heatmap/{i}.svg
  std::string_view name = rest[1];
  name.remove_suffix(4);
  auto index = parse_slide_index(name);
  const Slide* slide = index ? lecture.find_slide(*index) : nullptr;
  if (slide == nullptr) return not_found();
  HeatmapOptions opts = heatmap_options_from_query(request.query);
  const std::vector<MuddyCard> cards = store_.snapshot_cards(lecture.lecture_id);
  SlideAggregates aggregates = points_by_slide(cards, lecture, opts.color_mode);
  return HttpResponse{200, "image/svg+xml",
                      render_heatmap_svg(*slide, aggregates.at(slide->index), opts,
                                         slide_url(lecture, *slide, lecture.teacher_token))};
}

HttpResponse Service::submit(const Lecture& lecture, const HttpRequest& request) const {
  Json body = Json::parse(request.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) {
    return json_response(
        422, Json{{"error", "validation_failed"},
                  {"violations", violations_to_json({Violation{ViolationCode::Malformed,
                                                               std::nullopt,
                                                               "request body is not valid JSON"}})}});
  }
  CardPayload payload = card_from_payload(body, lecture);
  payload.card = normalize_card(std::move(payload.card));
  ValidationResult violations = payload_violations(payload, lecture);
  if (!violations.empty()) throw ValidationError(0, std::move(violations));

  MuddyCard card = std::move(payload.card);
  card.card_id = mint_id();
  card.submitted_at = now_utc();
  std::string id = store_.append_card(lecture.lecture_id, std::move(card), config_.max_cards_per_token);
  return json_response(201, Json{{"card_id", id}});
}

HttpResponse Service::create_lecture(const HttpRequest& request) const {
  bool allowed = is_loopback(request.remote_addr);
  if (!allowed && !config_.admin_key.empty()) {
    auto it = request.headers.find("x-admin-key");
    allowed = it != request.headers.end() && constant_time_equal(it->second, config_.admin_key);
  }
  if (!allowed) return forbidden();

  Json body = Json::parse(request.body, nullptr, /*allow_exceptions=*/false);
  if (!body.is_object() || !body.contains("image_dir") || !body["image_dir"].is_string() ||
      !body.contains("title") || !body["title"].is_string()) {
    return error_response(422, "Malformed", "expected {\"image_dir\": string, \"title\": string}");
  }
  LectureMode mode = LectureMode::Spatial;
  if (body.contains("mode") && body["mode"].is_string()) mode = parse_mode(body["mode"].get<std::string>());
  std::vector<std::string> order;
  if (body.contains("slide_order") && body["slide_order"].is_array()) {
    for (const Json& name : body["slide_order"]) {
      if (!name.is_string()) return error_response(422, "Malformed", "slide_order holds file names");
      order.push_back(name.get<std::string>());
    }
  }
  Lecture lecture = store_.create_lecture(body["image_dir"].get<std::string>(),
                                          body["title"].get<std::string>(), mode, order);
  Json out = lecture_to_json(lecture);
  out["student_url"] = student_view_url(lecture, "");
  out["teacher_url"] = teacher_view_url(lecture, "");
  return json_response(201, out);
}

HttpResponse Service::slide_image(std::string_view lecture_id, std::string_view file,
                                  const HttpRequest& request) const {
  auto token = request.query.find("token");
  if (token == request.query.end()) return not_found();
  auto access = resolve_token(token->second);
  if (!access || access->lecture_id != lecture_id) return not_found();
  const Lecture lecture = store_.lecture(lecture_id);
  for (const Slide& s : lecture.slides) {
    if (s.image_file != file) continue;
    fs::path path = store_.slide_path(lecture, s);
    auto bytes = read_binary(path);
    if (!bytes) return not_found();
    return HttpResponse{200, content_type_for(path), std::move(*bytes)};
  }
  return not_found();
}

HttpResponse Service::static_page(std::string_view token, Role role) const {
  auto access = resolve_token(token);
  if (!access) return not_found();
  if (access->role != role) return forbidden();
  if (config_.static_dir.empty()) return not_found();
  auto page = read_binary(config_.static_dir / (role == Role::Student ? "student.html" : "teacher.html"));
  if (!page) return not_found();
  return HttpResponse{200, "text/html; charset=utf-8", std::move(*page)};
}

std::pair<std::string, int> parse_bind_address(std::string_view address) {
  std::string host = "127.0.0.1";
  int port = 8080;
  auto colon = address.rfind(':');
  std::string_view host_part = address;
  if (colon != std::string_view::npos) {
    host_part = address.substr(0, colon);
    std::string_view port_part = address.substr(colon + 1);
    auto [end, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
    if (ec != std::errc{} || end != port_part.data() + port_part.size() || port < 0 || port > 65535) {
      throw Error(ErrorCode::InvalidOptions, "invalid port in '" + std::string(address) + "'");
    }
  }
  if (host_part.size() >= 2 && host_part.front() == '[' && host_part.back() == ']') {
    host_part = host_part.substr(1, host_part.size() - 2);
  }
  if (!host_part.empty()) host = std::string(host_part);
  return {host, port};
}

}  // namespace mudslide
