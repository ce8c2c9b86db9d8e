#include "ltbench/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "ltbench/errors.hpp"

namespace lt {

namespace {

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

/// libpng reports through these instead of printing to stderr.
struct PngMessage {
  char text[200] = "";
};

void on_error(png_structp png, png_const_charp msg) {
  auto* m = static_cast<PngMessage*>(png_get_error_ptr(png));
  std::snprintf(m->text, sizeof m->text, "%s", msg);
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

}  // namespace

void write_png(const std::filesystem::path& path, const ImageTensor& image) {
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot write " + path.string());
  PngMessage msg;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &msg, on_error, on_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng initialization failed");
  }
  std::vector<std::uint8_t> bytes(ImageTensor::kSize);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(image.pixels()[i]);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encoding failed for " + path.string() + ": " + msg.text);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, ImageTensor::kWidth, ImageTensor::kHeight, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < ImageTensor::kHeight; ++y) {
    png_write_row(png, bytes.data() + y * ImageTensor::kWidth * ImageTensor::kChannels);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageTensor read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open " + path.string());
  PngMessage msg;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &msg, on_error, on_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialization failed");
  }
  std::vector<std::uint8_t> bytes(ImageTensor::kSize);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("cannot decode PNG " + path.string() + ": " + msg.text);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  const auto depth = png_get_bit_depth(png, info);
  const auto type = png_get_color_type(png, info);
  if (w != ImageTensor::kWidth || h != ImageTensor::kHeight || depth != 8 || type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": expected a 64x64 8-bit RGB PNG");
  }
  for (std::size_t y = 0; y < ImageTensor::kHeight; ++y) {
    png_read_row(png, bytes.data() + y * ImageTensor::kWidth * ImageTensor::kChannels, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  ImageTensor img;
  for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels()[i] = static_cast<float>(bytes[i]) / 255.0f;
  return img;
}

ImageTensor quantize_8bit(const ImageTensor& image) {
  ImageTensor out;
  for (std::size_t i = 0; i < ImageTensor::kSize; ++i) out.pixels()[i] = static_cast<float>(to_byte(image.pixels()[i])) / 255.0f;
  return out;
}

}  // namespace lt
