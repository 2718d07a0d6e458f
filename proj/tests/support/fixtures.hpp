#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mudslide/core.hpp"
#include "mudslide/service.hpp"
#include "mudslide/store.hpp"

namespace mudslide::testing {

// Removes itself on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Valid, decodable grayscale PNG.
void write_png(const std::filesystem::path& file, int width, int height);
// SOI + APP0 + SOF0 + EOI; enough for header parsing.
void write_jpeg(const std::filesystem::path& file, int width, int height);

// slide01.png .. slideNN.png in `dir`.
void write_gallery(const std::filesystem::path& dir, int slides, int width = 1280,
                   int height = 720);

// In-memory lecture with `slides` slides of the given size.
Lecture make_lecture(int slides, int width = 1000, int height = 1000,
                     LectureMode mode = LectureMode::Spatial);

MuddyCard spatial_card(const Lecture& lecture, std::vector<MuddyPoint> points,
                       ConfusionRating rating = ConfusionRating::ModeratelyConfusing);
MuddyCard baseline_card(const Lecture& lecture, std::string text, ConfusionRating rating);

// Cards whose points land on slides with exactly `counts[slide]` points in
// total. Cards take one or two points (two while more than `cards` would
// otherwise be needed). Deterministic for a given seed.
std::vector<MuddyCard> seeded_cards(const Lecture& lecture, const std::map<int, int>& counts,
                                    std::size_t cards, std::uint32_t seed);

// Kinetic-energy lecture: 2 slides, 106 points, {1: 7, 2: 99}, 68 cards.
inline const std::map<int, int> kKineticCounts = {{1, 7}, {2, 99}};
inline constexpr std::size_t kKineticCards = 68;
// Experiment-design lecture: 13 slides, 60 points, 19 on slide 7, 40 cards.
inline const std::map<int, int> kPluralityCounts = {
    {1, 3}, {2, 4}, {3, 2}, {4, 5}, {5, 3}, {6, 6}, {7, 19},
    {8, 4}, {9, 3}, {10, 2}, {11, 4}, {12, 3}, {13, 2}};
inline constexpr std::size_t kPluralityCards = 40;

// Ingests a generated gallery into `store` and appends the seeded cards.
Lecture seed_store(Store& store, const std::filesystem::path& scratch, int slides,
                   const std::map<int, int>& counts, std::size_t cards, std::uint32_t seed);

// Runs an HttpServer on a free loopback port for the lifetime of the object.
class LiveServer {
 public:
  explicit LiveServer(const Service& service);
  ~LiveServer();

  int port() const { return port_; }

 private:
  HttpServer server_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace mudslide::testing
