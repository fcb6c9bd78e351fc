#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vidcurate::image_io {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB8
};

/// Whole-file read; Errc::IoError when the file cannot be opened.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Decodes PNG or BMP (detected from the leading magic bytes). Palette, gray,
/// alpha and 16-bit PNGs are normalized to RGB8; alpha is dropped.
/// Errc::DecodeError names `path` on failure.
RgbImage decode(const std::filesystem::path& path);
RgbImage decode(std::span<const std::uint8_t> bytes, const std::filesystem::path& name_for_errors);

/// 24-bit bottom-up uncompressed BMP.
std::vector<std::uint8_t> encode_bmp(const RgbImage& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);

void write_bmp(const std::filesystem::path& path, const RgbImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);

bool is_supported_extension(const std::filesystem::path& path);

}  // namespace vidcurate::image_io
