#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

namespace mudslide {

enum class ImageFormat { Png, Jpeg };

struct ImageInfo {
  ImageFormat format;
  int width = 0;
  int height = 0;
};

// Reads dimensions from PNG (IHDR) or JPEG (SOFn) headers. Returns nullopt
// when the bytes are not a well-formed header of either format.
std::optional<ImageInfo> read_image_info(std::string_view bytes);
std::optional<ImageInfo> read_image_info(const std::filesystem::path& file);

// .png, .jpg or .jpeg, case-insensitive.
bool has_image_extension(const std::filesystem::path& file);

}  // namespace mudslide
