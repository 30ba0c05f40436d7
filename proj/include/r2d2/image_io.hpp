#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "r2d2/image.hpp"

namespace r2d2 {

/// raw: "R2D2" magic, u32 width, u32 height, u32 dtype (1 = f32), then row-major f32,
/// all little-endian. png: 16-bit grayscale, value / 65535.
enum class ImageFormat { raw, png16 };

inline constexpr std::uint32_t kRawDtypeF32 = 1;

/// Format from the file extension: ".png" is PNG, everything else raw.
ImageFormat format_for_path(const std::filesystem::path& path);

/// Detects the format from the file contents. PNG input may be 8- or 16-bit grayscale.
Image load_image(const std::filesystem::path& path);

/// raw stores an exact float32 downcast; PNG clamps to [0, 1] and rounds half away from
/// zero. Written to a temporary file and renamed into place.
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format);
void save_image(const Image& img, const std::filesystem::path& path);

/// Writes `bytes` to `path` via temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace r2d2
