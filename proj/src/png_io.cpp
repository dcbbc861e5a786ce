#include "has/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "has/error.hpp"

namespace has {

namespace {

int channels_of(png_uint_32 format) { return static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(format)); }

png_uint_32 format_for(int channels) {
  switch (channels) {
    case 1:
      return PNG_FORMAT_GRAY;
    case 2:
      return PNG_FORMAT_GA;
    case 3:
      return PNG_FORMAT_RGB;
    default:
      return PNG_FORMAT_RGBA;
  }
}

}  // namespace

unsigned char quantize_u8(float v) {
  const double clamped = std::fmin(255.0, std::fmax(0.0, static_cast<double>(v)));
  return static_cast<unsigned char>(std::floor(clamped + 0.5));
}

Tensor3 read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError(path.string() + ": " + image.message);
  }
  // Keep the file's own channel layout so 8-bit samples pass through unchanged.
  const png_uint_32 src = image.format;
  int channels = (src & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  if (src & PNG_FORMAT_FLAG_ALPHA) ++channels;
  image.format = format_for(channels);
  std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError(path.string() + ": " + image.message);
  }
  std::vector<float> values(bytes.begin(), bytes.end());
  return Tensor3::from_data(static_cast<int>(image.height), static_cast<int>(image.width), channels_of(image.format),
                            std::move(values));
}

void write_png(const Tensor3& img, const std::filesystem::path& path) {
  require(img.channels() >= 1 && img.channels() <= 4, "PNG output needs 1 to 4 channels");
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize_u8(img.data()[i]);

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = format_for(img.channels());
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw FormatError(path.string() + ": " + image.message);
  }
}

}  // namespace has
