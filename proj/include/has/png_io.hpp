#pragma once

#include <filesystem>

#include "has/tensor.hpp"

namespace has {

/// 8-bit PNG to a tensor of raw byte values (0..255). Gray, gray+alpha, RGB and
/// RGBA keep 1..4 channels; palette images expand to RGB; 16-bit is reduced to 8.
Tensor3 read_png(const std::filesystem::path& path);

/// Clamps to [0, 255] and rounds half up. The tensor needs 1..4 channels.
void write_png(const Tensor3& img, const std::filesystem::path& path);

/// Quantization used by write_png.
unsigned char quantize_u8(float v);

}  // namespace has
