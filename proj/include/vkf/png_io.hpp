#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vkf {

/// Single-channel image stored row-major.
template <typename T>
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;
};

/// Reads an 8- or 16-bit grayscale PNG; 8-bit data is widened. Throws
/// std::runtime_error on I/O or format errors.
GrayImage<std::uint16_t> read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const GrayImage<std::uint16_t>& image);
void write_png8(const std::filesystem::path& path, const GrayImage<std::uint8_t>& image);

}  // namespace vkf
