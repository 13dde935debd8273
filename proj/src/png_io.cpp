#include "vkf/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace vkf {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  return f;
}

template <typename T>
void write_gray(const std::filesystem::path& path, const GrayImage<T>& image, int bit_depth) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("write_png: inconsistent image buffer");
  }
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng: cannot allocate write structs");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng: failed writing '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, image.width, image.height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // PNG stores 16-bit samples big-endian
  for (int y = 0; y < image.height; ++y) {
    auto* row = const_cast<T*>(image.pixels.data() + static_cast<std::size_t>(y) * image.width);
    png_write_row(png, reinterpret_cast<png_bytep>(row));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage<std::uint16_t> read_png16(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng: cannot allocate read structs");
  }
  GrayImage<std::uint16_t> image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng: failed reading '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("'" + path.string() + "' is not a grayscale PNG");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
  if (depth == 16) {
    for (int y = 0; y < image.height; ++y) {
      png_read_row(png,
                   reinterpret_cast<png_bytep>(image.pixels.data() +
                                               static_cast<std::size_t>(y) * image.width),
                   nullptr);
    }
  } else {
    std::vector<png_byte> row(image.width);
    for (int y = 0; y < image.height; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (int x = 0; x < image.width; ++x) {
        image.pixels[static_cast<std::size_t>(y) * image.width + x] = row[x];
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_png16(const std::filesystem::path& path, const GrayImage<std::uint16_t>& image) {
  write_gray(path, image, 16);
}

void write_png8(const std::filesystem::path& path, const GrayImage<std::uint8_t>& image) {
  write_gray(path, image, 8);
}

}  // namespace vkf
