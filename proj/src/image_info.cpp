#include "mudslide/image_info.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

namespace mudslide {

namespace {

std::uint32_t be32(std::string_view b, std::size_t at) {
  return (std::uint32_t(static_cast<unsigned char>(b[at])) << 24) |
         (std::uint32_t(static_cast<unsigned char>(b[at + 1])) << 16) |
         (std::uint32_t(static_cast<unsigned char>(b[at + 2])) << 8) |
         std::uint32_t(static_cast<unsigned char>(b[at + 3]));
}

std::uint16_t be16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>((static_cast<unsigned char>(b[at]) << 8) |
                                    static_cast<unsigned char>(b[at + 1]));
}

std::optional<ImageInfo> read_png(std::string_view b) {
  static constexpr std::string_view kSignature("\x89PNG\r\n\x1a\n", 8);
  // signature, IHDR length + type, width, height
  if (b.size() < 8 + 8 + 8 || b.substr(0, 8) != kSignature) return std::nullopt;
  if (be32(b, 8) != 13 || b.substr(12, 4) != "IHDR") return std::nullopt;
  std::uint32_t w = be32(b, 16);
  std::uint32_t h = be32(b, 20);
  if (w == 0 || h == 0 || w > 0x7FFFFFFF || h > 0x7FFFFFFF) return std::nullopt;
  return ImageInfo{ImageFormat::Png, static_cast<int>(w), static_cast<int>(h)};
}

std::optional<ImageInfo> read_jpeg(std::string_view b) {
  if (b.size() < 4 || static_cast<unsigned char>(b[0]) != 0xFF ||
      static_cast<unsigned char>(b[1]) != 0xD8) {
    return std::nullopt;
  }
  std::size_t pos = 2;
  while (pos + 4 <= b.size()) {
    if (static_cast<unsigned char>(b[pos]) != 0xFF) return std::nullopt;
    unsigned char marker = static_cast<unsigned char>(b[pos + 1]);
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    pos += 2;
    if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) continue;
    if (marker == 0xD9 || marker == 0xDA) return std::nullopt;  // no frame header before data
    std::uint16_t length = be16(b, pos);
    if (length < 2 || pos + length > b.size()) return std::nullopt;
    bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                  marker != 0xCC;
    if (is_sof) {
      if (length < 7) return std::nullopt;
      int h = be16(b, pos + 3);
      int w = be16(b, pos + 5);
      if (w == 0 || h == 0) return std::nullopt;
      return ImageInfo{ImageFormat::Jpeg, w, h};
    }
    pos += length;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ImageInfo> read_image_info(std::string_view bytes) {
  if (auto png = read_png(bytes)) return png;
  return read_jpeg(bytes);
}

std::optional<ImageInfo> read_image_info(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  // JPEG frame headers can sit behind large EXIF blocks; cap what is read.
  constexpr std::size_t kMaxHeaderBytes = 4 << 20;
  std::string bytes(kMaxHeaderBytes, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return read_image_info(std::string_view(bytes));
}

bool has_image_extension(const std::filesystem::path& file) {
  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace mudslide
