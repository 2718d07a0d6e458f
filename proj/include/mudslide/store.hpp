#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mudslide/core.hpp"

namespace mudslide {

struct StoreOptions {
  // fdatasync after every committed record.
  bool sync_writes = true;
};

struct TokenMatch {
  std::string lecture_id;
  Role role = Role::Student;
};

// File-backed lecture store. Layout:
//   data_root/<lecture_id>/lecture.json   manifest
//   data_root/<lecture_id>/cards.jsonl    append-only card log
//   data_root/<lecture_id>/slides/        copied slide images
//
// Writers to one lecture are serialized with an exclusive flock on the log,
// so several processes may share a data root. Readers never lock: a record
// is visible once its terminating newline is on disk, and a trailing partial
// line is ignored (and truncated by the next writer).
class Store {
 public:
  explicit Store(std::filesystem::path data_root, StoreOptions options = {});

  const std::filesystem::path& data_root() const { return data_root_; }

  // Slides are the png/jpg files of image_dir in lexicographic filename
  // order, or exactly `slide_order` when given.
  Lecture create_lecture(const std::filesystem::path& image_dir, std::string title,
                         LectureMode mode, std::span<const std::string> slide_order = {});

  Lecture lecture(std::string_view lecture_id) const;
  std::vector<std::string> lecture_ids() const;

  // Compares against every known token without early exit.
  std::optional<TokenMatch> find_token(std::string_view token) const;

  // Validates and commits the card; mints card_id when empty. With
  // max_cards > 0, fails with CapacityReached once the log holds that many.
  std::string append_card(std::string_view lecture_id, MuddyCard card, std::size_t max_cards = 0);

  std::vector<MuddyCard> snapshot_cards(std::string_view lecture_id) const;
  std::size_t card_count(std::string_view lecture_id) const;

  // Committed log bytes, verbatim.
  std::string export_jsonl(std::string_view lecture_id) const;
  // All-or-nothing; records are re-homed to lecture_id. Blank lines are
  // skipped. Throws ValidationError naming the first bad line.
  std::size_t import_jsonl(std::string_view lecture_id, std::istream& in);

  void delete_lecture(std::string_view lecture_id);

  std::filesystem::path lecture_dir(std::string_view lecture_id) const;
  std::filesystem::path log_path(std::string_view lecture_id) const;
  std::filesystem::path slide_path(const Lecture& lecture, const Slide& slide) const;

 private:
  void rescan_locked() const;
  void refresh_if_changed() const;
  std::optional<Lecture> find_lecture(std::string_view lecture_id) const;
  void append_lines(const Lecture& lecture, std::string_view bytes, std::size_t records,
                    std::size_t max_cards);

  std::filesystem::path data_root_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, Lecture, std::less<>> lectures_;
  mutable std::filesystem::file_time_type scanned_mtime_{};
};

}  // namespace mudslide
