#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "mudslide/aggregation.hpp"
#include "mudslide/codec.hpp"
#include "mudslide/store.hpp"
#include "mudslide/textviz.hpp"

namespace mudslide {

struct ServiceConfig {
  // 0 disables the cap.
  std::size_t max_cards_per_token = 50;
  // When non-empty, POST /api/lectures accepts this key (X-Admin-Key header)
  // from any address; loopback callers never need it.
  std::string admin_key;
  // Holds student.html and teacher.html for /s/{token} and /t/{token}.
  std::filesystem::path static_dir;
  StopwordSet stopwords = default_stopwords();
  std::size_t histogram_top_n = 10;

  // Reads MUDSLIDE_ADMIN_KEY, MUDSLIDE_MAX_CARDS_PER_TOKEN, MUDSLIDE_STOPWORDS.
  static ServiceConfig from_env();
};

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
  std::string remote_addr = "127.0.0.1";
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ResolvedAccess {
  std::string lecture_id;
  Role role = Role::Student;
};

// Routes (all JSON unless noted):
//   POST /api/lectures                        admin: create a lecture
//   GET  /api/s/{token}                       student view
//   POST /api/s/{token}/cards                 submit a card
//   GET  /api/t/{token}/summary               teacher dashboard payload
//   GET  /api/t/{token}/slides/{i}/comments   one slide's comments
//   GET  /api/t/{token}/heatmap/{i}.svg       heatmap overlay (image/svg+xml)
//   GET  /api/t/{token}/wordtree              word tree
//   GET  /api/t/{token}/export.jsonl          card log
//   GET  /api/slides/{lecture_id}/{file}?token=  slide image
//   GET  /s/{token}, /t/{token}               static single-page views
//
// Unknown tokens and missing resources are both 404; a valid token used on
// the other role's routes is 403.
class Service {
 public:
  Service(Store& store, ServiceConfig config = {});

  HttpResponse handle(const HttpRequest& request) const;

  std::optional<ResolvedAccess> resolve_token(std::string_view token) const;

  static std::string student_view_url(const Lecture& lecture, std::string_view base_url);
  static std::string teacher_view_url(const Lecture& lecture, std::string_view base_url);

  // Payload builders, shared with the CLI.
  Json teacher_summary(const Lecture& lecture, const std::map<std::string, std::string>& query) const;
  Json student_view(const Lecture& lecture) const;

 private:
  HttpResponse route(const HttpRequest& request) const;
  HttpResponse create_lecture(const HttpRequest& request) const;
  HttpResponse submit(const Lecture& lecture, const HttpRequest& request) const;
  HttpResponse slide_image(std::string_view lecture_id, std::string_view file,
                           const HttpRequest& request) const;
  HttpResponse static_page(std::string_view token, Role role) const;

  Store& store_;
  ServiceConfig config_;
};

// Parses the heatmap query parameters (radius_frac, opacity, color_mode,
// visible) on top of defaults. Throws Error(InvalidOptions).
HeatmapOptions heatmap_options_from_query(const std::map<std::string, std::string>& query);
WordTreeOptions word_tree_options_from_query(const std::map<std::string, std::string>& query);

Json to_json(const SummaryStats& stats);
Json to_json(const Histogram& histogram);
Json to_json(const WordTreeNode& node);
Json to_json(const WordTree& tree);

// Blocking HTTP/1.1 front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port", "host" (port 8080) or ":port" (host 127.0.0.1).
std::pair<std::string, int> parse_bind_address(std::string_view address);

}  // namespace mudslide
