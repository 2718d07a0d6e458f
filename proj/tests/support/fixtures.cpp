#include "fixtures.hpp"

#include <zlib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "httplib.h"

namespace fs = std::filesystem;

namespace mudslide::testing {

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "mudslide-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

void put32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

void chunk(std::string& out, const char* type, const std::string& data) {
  put32(out, static_cast<std::uint32_t>(data.size()));
  std::string body = std::string(type, 4) + data;
  out += body;
  put32(out, static_cast<std::uint32_t>(
                 ::crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace

void write_png(const fs::path& file, int width, int height) {
  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put32(ihdr, static_cast<std::uint32_t>(width));
  put32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit grayscale
  chunk(png, "IHDR", ihdr);

  std::string raw;
  for (int y = 0; y < height; ++y) {
    raw.push_back('\0');  // filter: none
    raw.append(static_cast<std::size_t>(width), static_cast<char>(0xF0));
  }
  uLongf size = ::compressBound(static_cast<uLong>(raw.size()));
  std::string packed(size, '\0');
  ::compress(reinterpret_cast<Bytef*>(packed.data()), &size,
             reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()));
  packed.resize(size);
  chunk(png, "IDAT", packed);
  chunk(png, "IEND", "");

  std::ofstream(file, std::ios::binary) << png;
}

void write_jpeg(const fs::path& file, int width, int height) {
  std::string j;
  j += "\xFF\xD8";
  j += std::string("\xFF\xE0\x00\x10JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00", 18);
  j += std::string("\xFF\xC0\x00\x0B\x08", 5);
  j.push_back(static_cast<char>(height >> 8));
  j.push_back(static_cast<char>(height & 0xFF));
  j.push_back(static_cast<char>(width >> 8));
  j.push_back(static_cast<char>(width & 0xFF));
  j += std::string("\x01\x01\x11\x00", 4);
  j += "\xFF\xD9";
  std::ofstream(file, std::ios::binary) << j;
}

void write_gallery(const fs::path& dir, int slides, int width, int height) {
  fs::create_directories(dir);
  for (int i = 1; i <= slides; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "slide%02d.png", i);
    write_png(dir / name, width, height);
  }
}

Lecture make_lecture(int slides, int width, int height, LectureMode mode) {
  Lecture lecture;
  lecture.lecture_id = "lec-" + std::to_string(slides);
  lecture.title = "fixture";
  lecture.mode = mode;
  lecture.student_token = "student-token";
  lecture.teacher_token = "teacher-token";
  for (int i = 1; i <= slides; ++i) {
    lecture.slides.push_back(Slide{i, "slide" + std::to_string(i) + ".png", width, height});
  }
  return lecture;
}

MuddyCard spatial_card(const Lecture& lecture, std::vector<MuddyPoint> points,
                       ConfusionRating rating) {
  static int counter = 0;
  MuddyCard card;
  card.card_id = "card-" + std::to_string(++counter);
  card.lecture_id = lecture.lecture_id;
  card.mode = LectureMode::Spatial;
  card.rating = rating;
  card.points = std::move(points);
  card.submitted_at = Timestamp{std::chrono::milliseconds(1'700'000'000'000LL + counter)};
  return card;
}

MuddyCard baseline_card(const Lecture& lecture, std::string text, ConfusionRating rating) {
  MuddyCard card = spatial_card(lecture, {}, rating);
  card.mode = LectureMode::Baseline;
  card.free_text = std::move(text);
  return card;
}

std::vector<MuddyCard> seeded_cards(const Lecture& lecture, const std::map<int, int>& counts,
                                    std::size_t cards, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<int> slots;
  for (const auto& [slide, count] : counts) slots.insert(slots.end(), count, slide);
  std::shuffle(slots.begin(), slots.end(), rng);
  if (slots.size() < cards || slots.size() > 2 * cards) {
    throw std::invalid_argument("cards must hold one or two points each");
  }
  std::size_t doubles = slots.size() - cards;
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::uniform_int_distribution<int> pick_rating(0, 3);
  auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };

  std::vector<MuddyCard> out;
  std::size_t next = 0;
  for (std::size_t c = 0; c < cards; ++c) {
    std::size_t n = c < doubles ? 2 : 1;
    std::vector<MuddyPoint> points;
    for (std::size_t k = 0; k < n; ++k) {
      int slide = slots[next++];
      points.push_back(MuddyPoint{slide, clamp01(0.45 + jitter(rng)), clamp01(0.55 + jitter(rng)),
                                  "why is slide " + std::to_string(slide) + " equation unclear"});
    }
    auto rating = static_cast<ConfusionRating>(pick_rating(rng));
    out.push_back(spatial_card(lecture, std::move(points), rating));
  }
  return out;
}

Lecture seed_store(Store& store, const fs::path& scratch, int slides, const std::map<int, int>& counts,
                   std::size_t cards, std::uint32_t seed) {
  fs::path gallery = scratch / ("gallery-" + std::to_string(seed));
  write_gallery(gallery, slides, 64, 36);
  Lecture lecture = store.create_lecture(gallery, "seeded", LectureMode::Spatial);
  for (MuddyCard& card : seeded_cards(lecture, counts, cards, seed)) {
    store.append_card(lecture.lecture_id, std::move(card));
  }
  return lecture;
}

LiveServer::LiveServer(const Service& service) : server_(service) {
  port_ = server_.bind("127.0.0.1", 0);
  if (port_ <= 0) throw std::runtime_error("cannot bind test server");
  thread_ = std::thread([this] { server_.listen(); });
  httplib::Client probe("127.0.0.1", port_);
  for (int i = 0; i < 200; ++i) {
    if (probe.Get("/")) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  throw std::runtime_error("test server did not start");
}

LiveServer::~LiveServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mudslide::testing
