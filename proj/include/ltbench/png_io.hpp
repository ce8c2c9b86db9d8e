#pragma once

#include <filesystem>

#include "ltbench/tunnel.hpp"

namespace lt {

/// 8-bit RGB PNG; each value is stored as round(clamp(v, 0, 1) * 255).
void write_png(const std::filesystem::path& path, const ImageTensor& image);

/// Reads a 64x64 8-bit RGB PNG into [0, 1]. Throws FormatError.
ImageTensor read_png(const std::filesystem::path& path);

/// The value an image holds after a PNG round trip.
ImageTensor quantize_8bit(const ImageTensor& image);

}  // namespace lt
