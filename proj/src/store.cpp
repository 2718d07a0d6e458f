#include "mudslide/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <sstream>

#include "mudslide/codec.hpp"
#include "mudslide/image_info.hpp"

namespace fs = std::filesystem;

namespace mudslide {

namespace {

constexpr const char* kManifestFile = "lecture.json";
constexpr const char* kLogFile = "cards.jsonl";
constexpr const char* kSlidesDir = "slides";

[[noreturn]] void io_error(const std::string& what) {
  throw Error(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& file, std::string_view contents) {
  fs::path tmp = file;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_error("cannot create '" + tmp.string() + "'");
  std::size_t done = 0;
  while (done < contents.size()) {
    ssize_t n = ::write(fd, contents.data() + done, contents.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      io_error("cannot write '" + tmp.string() + "'");
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  if (::rename(tmp.c_str(), file.c_str()) != 0) io_error("cannot rename '" + tmp.string() + "'");
}

// Only newline-terminated records count; a trailing fragment is a write in
// progress or a crash artifact.
std::string_view committed_prefix(std::string_view bytes) {
  auto last = bytes.rfind('\n');
  return last == std::string_view::npos ? std::string_view{} : bytes.substr(0, last + 1);
}

// Exclusive, RAII-held append handle on a card log.
class LogWriter {
 public:
  explicit LogWriter(const fs::path& file) : path_(file) {
    fd_ = ::open(file.c_str(), O_RDWR | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) io_error("cannot open '" + file.string() + "'");
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        io_error("cannot lock '" + file.string() + "'");
      }
    }
  }
  ~LogWriter() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  // Cuts a trailing partial record left behind by a crashed writer.
  void repair_tail() {
    struct stat st {};
    if (::fstat(fd_, &st) != 0) io_error("cannot stat '" + path_.string() + "'");
    off_t size = st.st_size;
    if (size == 0) return;
    char last = 0;
    if (::pread(fd_, &last, 1, size - 1) != 1) io_error("cannot read '" + path_.string() + "'");
    if (last == '\n') return;
    off_t keep = 0;
    char buf[4096];
    for (off_t end = size; end > 0 && keep == 0;) {
      off_t begin = std::max<off_t>(0, end - static_cast<off_t>(sizeof buf));
      ssize_t n = ::pread(fd_, buf, static_cast<std::size_t>(end - begin), begin);
      if (n < 0) io_error("cannot read '" + path_.string() + "'");
      for (ssize_t i = n; i-- > 0;) {
        if (buf[i] == '\n') {
          keep = begin + i + 1;
          break;
        }
      }
      end = begin;
    }
    if (::ftruncate(fd_, keep) != 0) io_error("cannot truncate '" + path_.string() + "'");
  }

  std::size_t count_records() const {
    std::string bytes = read_file(path_);
    return static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n'));
  }

  void append(std::string_view bytes, bool sync) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      ssize_t n = ::write(fd_, bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        io_error("cannot append to '" + path_.string() + "'");
      }
      done += static_cast<std::size_t>(n);
    }
    if (sync && ::fdatasync(fd_) != 0) io_error("cannot sync '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

Error unknown_lecture(std::string_view id) {
  return Error(ErrorCode::UnknownLecture, "unknown lecture '" + std::string(id) + "'");
}

}  // namespace

Store::Store(fs::path data_root, StoreOptions options)
    : data_root_(std::move(data_root)), options_(options) {
  std::error_code ec;
  fs::create_directories(data_root_, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create data root '" + data_root_.string() + "': " + ec.message());
  }
  std::unique_lock lock(mutex_);
  rescan_locked();
}

fs::path Store::lecture_dir(std::string_view lecture_id) const {
  return data_root_ / std::string(lecture_id);
}

fs::path Store::log_path(std::string_view lecture_id) const {
  return lecture_dir(lecture_id) / kLogFile;
}

fs::path Store::slide_path(const Lecture& lecture, const Slide& slide) const {
  return lecture_dir(lecture.lecture_id) / kSlidesDir / slide.image_file;
}

void Store::rescan_locked() const {
  std::error_code ec;
  scanned_mtime_ = fs::last_write_time(data_root_, ec);
  std::map<std::string, Lecture, std::less<>> found;
  for (const fs::directory_entry& entry : fs::directory_iterator(data_root_, ec)) {
    std::string name = entry.path().filename().string();
    if (name.empty() || name.front() == '.' || !entry.is_directory()) continue;
    fs::path manifest = entry.path() / kManifestFile;
    if (!fs::exists(manifest)) continue;
    try {
      Lecture lecture = lecture_from_json(Json::parse(read_file(manifest)));
      if (lecture.lecture_id == name) found.emplace(name, std::move(lecture));
    } catch (const std::exception&) {
      // Unreadable manifests are not served.
    }
  }
  lectures_ = std::move(found);
}

void Store::refresh_if_changed() const {
  std::error_code ec;
  auto mtime = fs::last_write_time(data_root_, ec);
  {
    std::shared_lock lock(mutex_);
    if (ec || mtime == scanned_mtime_) return;
  }
  std::unique_lock lock(mutex_);
  rescan_locked();
}

std::optional<Lecture> Store::find_lecture(std::string_view lecture_id) const {
  for (int attempt = 0; attempt < 2; ++attempt) {
    {
      std::shared_lock lock(mutex_);
      auto it = lectures_.find(lecture_id);
      if (it != lectures_.end()) return it->second;
    }
    if (attempt == 0) refresh_if_changed();
  }
  return std::nullopt;
}

Lecture Store::lecture(std::string_view lecture_id) const {
  if (auto found = find_lecture(lecture_id)) return *found;
  throw unknown_lecture(lecture_id);
}

std::vector<std::string> Store::lecture_ids() const {
  refresh_if_changed();
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, lecture] : lectures_) ids.push_back(id);
  return ids;
}

std::optional<TokenMatch> Store::find_token(std::string_view token) const {
  refresh_if_changed();
  std::shared_lock lock(mutex_);
  std::optional<TokenMatch> match;
  for (const auto& [id, lecture] : lectures_) {
    bool student = constant_time_equal(token, lecture.student_token);
    bool teacher = constant_time_equal(token, lecture.teacher_token);
    if (student) match = TokenMatch{id, Role::Student};
    if (teacher) match = TokenMatch{id, Role::Teacher};
  }
  return match;
}

Lecture Store::create_lecture(const fs::path& image_dir, std::string title, LectureMode mode,
                              std::span<const std::string> slide_order) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!slide_order.empty()) {
    for (const std::string& name : slide_order) files.push_back(image_dir / name);
  } else if (!image_dir.empty() && fs::is_directory(image_dir, ec)) {
    for (const fs::directory_entry& entry : fs::directory_iterator(image_dir, ec)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });
  } else if (mode == LectureMode::Spatial || !image_dir.empty()) {
    throw Error(ErrorCode::IoError, "'" + image_dir.string() + "' is not a directory");
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list '" + image_dir.string() + "': " + ec.message());
  if (files.empty() && mode == LectureMode::Spatial) {
    throw Error(ErrorCode::EmptyGallery, "no png/jpg slides in '" + image_dir.string() + "'");
  }

  Lecture lecture;
  lecture.lecture_id = mint_id();
  lecture.title = std::move(title);
  lecture.mode = mode;
  lecture.student_token = mint_id();
  do {
    lecture.teacher_token = mint_id();
  } while (lecture.teacher_token == lecture.student_token);
  lecture.created_at = now_utc();
  for (const fs::path& file : files) {
    auto info = read_image_info(file);
    if (!info) {
      throw Error(ErrorCode::UnreadableImage, "unreadable image '" + file.filename().string() + "'");
    }
    lecture.slides.push_back(Slide{static_cast<int>(lecture.slides.size()) + 1,
                                   file.filename().string(), info->width, info->height});
  }

  // Build the lecture under a hidden name, then publish it with one rename.
  fs::path staging = data_root_ / ("." + lecture.lecture_id + ".staging");
  fs::path target = lecture_dir(lecture.lecture_id);
  try {
    fs::create_directories(staging / kSlidesDir);
    for (std::size_t i = 0; i < files.size(); ++i) {
      fs::copy_file(files[i], staging / kSlidesDir / lecture.slides[i].image_file,
                    fs::copy_options::overwrite_existing);
    }
    write_file_atomic(staging / kManifestFile, lecture_to_json(lecture).dump(2) + "\n");
    write_file_atomic(staging / kLogFile, "");
    fs::rename(staging, target);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw Error(ErrorCode::IoError, e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  std::unique_lock lock(mutex_);
  lectures_[lecture.lecture_id] = lecture;
  return lecture;
}

void Store::append_lines(const Lecture& lecture, std::string_view bytes, std::size_t records,
                         std::size_t max_cards) {
  LogWriter writer(log_path(lecture.lecture_id));
  writer.repair_tail();
  if (max_cards > 0 && writer.count_records() + records > max_cards) {
    throw Error(ErrorCode::CapacityReached,
                "lecture '" + lecture.lecture_id + "' already holds " + std::to_string(max_cards) +
                    " cards");
  }
  writer.append(bytes, options_.sync_writes);
}

std::string Store::append_card(std::string_view lecture_id, MuddyCard card,
                               std::size_t max_cards) {
  Lecture lec = lecture(lecture_id);
  if (card.lecture_id.empty()) card.lecture_id = lec.lecture_id;
  ValidationResult violations = validate_card(card, lec);
  if (card.lecture_id != lec.lecture_id) {
    violations.push_back(Violation{ViolationCode::Malformed, std::nullopt,
                                   "card belongs to lecture '" + card.lecture_id + "'"});
  }
  if (!violations.empty()) throw ValidationError(0, std::move(violations));
  if (card.card_id.empty()) card.card_id = mint_id();
  append_lines(lec, card_to_line(card) + "\n", 1, max_cards);
  return card.card_id;
}

std::vector<MuddyCard> Store::snapshot_cards(std::string_view lecture_id) const {
  Lecture lec = lecture(lecture_id);
  std::string bytes = read_file(log_path(lecture_id));
  std::string_view committed = committed_prefix(bytes);
  std::vector<MuddyCard> cards;
  std::size_t line_no = 0;
  while (!committed.empty()) {
    auto nl = committed.find('\n');
    std::string_view line = committed.substr(0, nl);
    committed.remove_prefix(nl + 1);
    ++line_no;
    try {
      cards.push_back(card_from_line(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::Malformed, "card log '" + log_path(lecture_id).string() + "' line " +
                                            std::to_string(line_no) + ": " + e.what());
    }
  }
  return cards;
}

std::size_t Store::card_count(std::string_view lecture_id) const {
  return snapshot_cards(lecture_id).size();
}

std::string Store::export_jsonl(std::string_view lecture_id) const {
  lecture(lecture_id);
  std::string bytes = read_file(log_path(lecture_id));
  return std::string(committed_prefix(bytes));
}

std::size_t Store::import_jsonl(std::string_view lecture_id, std::istream& in) {
  Lecture lec = lecture(lecture_id);
  std::string batch;
  std::size_t records = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    MuddyCard card;
    try {
      card = card_from_line(line);
    } catch (const Error& e) {
      throw ValidationError(line_no, {Violation{ViolationCode::Malformed, std::nullopt, e.what()}});
    }
    card.lecture_id = lec.lecture_id;
    ValidationResult violations = validate_card(card, lec);
    if (card.card_id.empty()) {
      violations.push_back(Violation{ViolationCode::Malformed, std::nullopt, "empty card_id"});
    }
    if (!violations.empty()) throw ValidationError(line_no, std::move(violations));
    batch += card_to_line(card);
    batch += '\n';
    ++records;
  }
  if (records > 0) append_lines(lec, batch, records, 0);
  return records;
}

void Store::delete_lecture(std::string_view lecture_id) {
  lecture(lecture_id);
  std::error_code ec;
  fs::remove_all(lecture_dir(lecture_id), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot delete lecture: " + ec.message());
  std::unique_lock lock(mutex_);
  lectures_.erase(std::string(lecture_id));
  scanned_mtime_ = fs::last_write_time(data_root_, ec);
}

}  // namespace mudslide
