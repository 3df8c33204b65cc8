#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "detkit/error.hpp"
#include "detkit/image.hpp"

namespace detkit {

namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(std::string("png decode: ") + png.image.message);
  }
  png.image.format = PNG_FORMAT_RGB;
  const Size size{static_cast<int>(png.image.width), static_cast<int>(png.image.height)};
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(std::string("png decode: ") + png.image.message);
  }
  std::vector<Rgb> pixels(buffer.size() / 3);
  std::memcpy(pixels.data(), buffer.data(), pixels.size() * 3);
  return RasterImage(size, std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  static_assert(sizeof(Rgb) == 3);
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width());
  png.image.height = static_cast<png_uint_32>(image.height());
  png.image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png.image, size, 0, image.pixels().data(), 0, nullptr)) {
    throw Error(std::string("png encode: ") + png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, image.pixels().data(), 0, nullptr)) {
    throw Error(std::string("png encode: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

RasterImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace detkit
