#include "mudslide/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mudslide/service.hpp"

namespace mudslide {

namespace {

std::string percent(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", share * 100.0);
  return buf;
}

void outline(std::ostream& out, const Json& node, int depth) {
  out << std::string(static_cast<std::size_t>(2 * depth + 2), ' ') << node["token"].get<std::string>()
      << " (" << node["count"].get<std::size_t>() << ")";
  if (node["terminal_count"].get<std::size_t>() > 0 && !node["children"].empty()) {
    out << " [ends " << node["terminal_count"].get<std::size_t>() << "]";
  }
  out << '\n';
  for (const Json& child : node["children"]) outline(out, child, depth + 1);
}

// Runs the server until SIGINT/SIGTERM.
int serve(Store& store, const ServiceConfig& config, const std::string& bind, std::ostream& out,
          std::ostream& err) {
  auto [host, port] = parse_bind_address(bind);
  Service service(store, config);
  HttpServer server(service);
  int bound = server.bind(host, port);
  if (bound < 0) {
    err << "error: cannot bind " << host << ":" << port << "\n";
    return kExitRuntime;
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  out << "listening on http://" << host << ":" << bound << std::endl;
  bool ok = server.listen();
  // Wake the waiter if listen returned on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

std::string render_report(const Json& payload) {
  std::ostringstream out;
  const Json& lecture = payload["lecture"];
  const Json& stats = payload["summary"];
  const bool spatial = lecture["mode"] == "spatial";

  out << "lecture: " << lecture["title"].get<std::string>() << " ("
      << lecture["lecture_id"].get<std::string>() << ", " << lecture["mode"].get<std::string>()
      << ")\n";
  out << "cards: " << stats["card_count"].get<std::size_t>() << "\n";
  if (spatial) {
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.2f", stats["points_per_card_mean"].get<double>());
    out << "muddy points: " << stats["point_count"].get<std::size_t>() << "\n";
    out << "points per card: " << mean << "\n";
  }
  out << "ratings:";
  for (ConfusionRating r : kAllRatings) {
    out << " " << canonical_label(r) << "="
        << stats["rating_histogram"][std::string(canonical_label(r))].get<std::size_t>();
  }
  out << "\n";

  if (spatial) {
    const Json& featured = stats["featured_slide"];
    if (featured.is_null()) {
      out << "featured slide: none\n";
    } else {
      for (const Json& slide : payload["slides"]) {
        if (slide["slide_index"] != featured) continue;
        out << "featured slide: " << featured.get<int>() << " ("
            << slide["point_count"].get<std::size_t>() << " points, "
            << percent(slide["share"].get<double>()) << ")\n";
      }
    }
    out << "\nper-slide counts:\n";
    std::vector<const Json*> slides;
    for (const Json& slide : payload["slides"]) slides.push_back(&slide);
    std::sort(slides.begin(), slides.end(), [](const Json* a, const Json* b) {
      return (*a)["slide_index"].get<int>() < (*b)["slide_index"].get<int>();
    });
    for (const Json* slide : slides) {
      out << "  slide " << (*slide)["slide_index"].get<int>() << ": "
          << (*slide)["point_count"].get<std::size_t>() << " ("
          << percent((*slide)["share"].get<double>()) << ")\n";
    }
  } else {
    out << "\ncomments (most confusing first):\n";
    for (const Json& c : payload["comments"]) {
      out << "  [" << c["rating"].get<std::string>() << "] " << c["text"].get<std::string>() << "\n";
    }
  }

  out << "\ntop words:\n";
  if (payload["histogram"].empty()) out << "  (none)\n";
  for (const Json& e : payload["histogram"]) {
    out << "  " << e["token"].get<std::string>() << " " << e["count"].get<std::size_t>() << "\n";
  }

  const Json& tree = payload["word_tree"];
  if (tree.is_null()) {
    out << "\nword tree: none\n";
  } else {
    out << "\nword tree (root \"" << tree["root_token"].get<std::string>() << "\"):\n";
    outline(out, tree["tree"], 0);
  }
  return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Muddy-point feedback for slide-based lecture videos.", "mudslide"};
  app.require_subcommand(1, 1);
  app.allow_extras(false);
  app.fallthrough();

  std::string data_root = "mudslide-data";
  if (const char* env = std::getenv("MUDSLIDE_DATA_ROOT"); env && *env) data_root = env;
  app.add_option("--data-root", data_root, "Directory holding all lectures")
      ->envname("MUDSLIDE_DATA_ROOT");

  std::string dir, title, base_url = "http://localhost:8080";
  bool baseline = false;
  auto* ingest = app.add_subcommand("ingest", "Create a lecture from a folder of slide images");
  ingest->add_option("--dir", dir, "Folder of .png/.jpg slides (lexicographic order)");
  ingest->add_option("--title", title, "Lecture title")->required();
  ingest->add_flag("--baseline", baseline, "Free-text muddy cards without slide anchors");
  ingest->add_option("--base-url", base_url, "Prefix for the printed URLs")->capture_default_str();

  std::string bind = "127.0.0.1:8080", admin_key, static_dir;
  std::size_t max_cards = 50;
  if (const char* env = std::getenv("MUDSLIDE_BIND_ADDR"); env && *env) bind = env;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--bind", bind, "host:port to listen on")->envname("MUDSLIDE_BIND_ADDR");
  serve_cmd->add_option("--admin-key", admin_key, "Key for POST /api/lectures from non-local callers")
      ->envname("MUDSLIDE_ADMIN_KEY");
  serve_cmd->add_option("--max-cards", max_cards, "Submission cap per student token (0 = none)")
      ->envname("MUDSLIDE_MAX_CARDS_PER_TOKEN");
  serve_cmd->add_option("--static-dir", static_dir, "Folder with student.html and teacher.html");

  std::string lecture_id, root, color_mode = "two_tone";
  std::size_t top_n = 10;
  auto* report = app.add_subcommand("report", "Print the teacher report as plain text");
  report->add_option("--lecture", lecture_id, "Lecture id")->required();
  report->add_option("--top-n", top_n, "Histogram length")->check(CLI::Range(1, 1000));
  report->add_option("--root", root, "Word tree root (default: most frequent word)");

  std::string out_file;
  auto* export_cmd = app.add_subcommand("export", "Write the card log as JSON lines");
  export_cmd->add_option("--lecture", lecture_id, "Lecture id")->required();
  export_cmd->add_option("--out", out_file, "Output file, '-' for stdout")->required();

  bool confirmed = false;
  auto* delete_cmd = app.add_subcommand("delete", "Delete a lecture and all of its cards");
  delete_cmd->add_option("--lecture", lecture_id, "Lecture id")->required();
  delete_cmd->add_flag("--yes", confirmed, "Confirm the deletion");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  auto usage = [&](CLI::App* cmd, const std::string& message) {
    err << "error: " << message << "\n\n" << cmd->help();
    return kExitUsage;
  };

  try {
    if (*ingest) {
      if (dir.empty() && !baseline) return usage(ingest, "--dir is required for spatial lectures");
      Store store(data_root);
      Lecture lecture = store.create_lecture(dir, title, baseline ? LectureMode::Baseline
                                                                  : LectureMode::Spatial);
      out << "lecture: " << lecture.lecture_id << "\n";
      out << "slides: " << lecture.slides.size() << "\n";
      out << "student url: " << Service::student_view_url(lecture, base_url) << "\n";
      out << "teacher url: " << Service::teacher_view_url(lecture, base_url) << "\n";
      return kExitOk;
    }
    if (*serve_cmd) {
      Store store(data_root);
      ServiceConfig config = ServiceConfig::from_env();
      config.admin_key = admin_key;
      config.max_cards_per_token = max_cards;
      config.static_dir = static_dir;
      return serve(store, config, bind, out, err);
    }
    if (*report) {
      Store store(data_root);
      Service service(store, ServiceConfig::from_env());
      std::map<std::string, std::string> query{{"top_n", std::to_string(top_n)},
                                               {"color_mode", color_mode}};
      if (!root.empty()) query["root"] = root;
      out << render_report(service.teacher_summary(store.lecture(lecture_id), query));
      return kExitOk;
    }
    if (*export_cmd) {
      Store store(data_root);
      std::string bytes = store.export_jsonl(lecture_id);
      if (out_file == "-") {
        out << bytes;
      } else {
        std::ofstream file(out_file, std::ios::binary | std::ios::trunc);
        file << bytes;
        if (!file) throw Error(ErrorCode::IoError, "cannot write '" + out_file + "'");
      }
      return kExitOk;
    }
    if (*delete_cmd) {
      if (!confirmed) return usage(delete_cmd, "refusing to delete without --yes");
      Store store(data_root);
      store.delete_lecture(lecture_id);
      out << "deleted lecture " << lecture_id << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace mudslide
