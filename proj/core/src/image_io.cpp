#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "mbio/gallery.hpp"

namespace mbio {
namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

// Reads one whitespace-delimited header token, skipping '#' comments.
class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw Error("PGM header value out of range");
      ++pos_;
    }
    if (pos_ == start) throw Error("malformed PGM header");
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw Error("malformed PGM header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 2;
};

bool has_png_signature(std::span<const unsigned char> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image decode_png(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error("cannot decode PNG '" + path.string() + "': " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error("cannot decode PNG '" + path.string() + "': " + message);
  }
  const int width = static_cast<int>(png.width);
  const int height = static_cast<int>(png.height);
  const std::size_t channels = color ? 4 : 2;
  std::vector<double> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const png_byte* px = &buffer[i * channels];
    if (color) {
      // Integer weights keep R=G=B=v exactly equal to v/255.
      const int y = 299 * px[0] + 587 * px[1] + 114 * px[2];
      pixels[i] = static_cast<double>(y) / 255000.0;
    } else {
      pixels[i] = static_cast<double>(px[0]) / 255.0;
    }
  }
  return Image(width, height, std::move(pixels));
}

}  // namespace

Image decode_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error("not a binary PGM (P5) image");
  }
  PnmHeaderReader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0) throw Error("PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw Error("only 8-bit PGM (maxval <= 255) is supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + count) throw Error("PGM raster is truncated");

  std::vector<double> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int v = bytes[offset + i];
    if (v > maxval) throw Error("PGM sample exceeds maxval");
    pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return Image(width, height, std::move(pixels));
}

Image read_image_file(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  if (has_png_signature(bytes)) return decode_png(path, bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    try {
      return decode_pgm(bytes);
    } catch (const Error& e) {
      throw Error("'" + path.string() + "': " + e.what());
    }
  }
  throw Error("unsupported image format '" + path.string() + "'");
}

Image resize_bilinear(const Image& src, int width, int height) {
  if (width <= 0 || height <= 0) throw Error("resize: target dimensions must be positive");
  if (src.width() == width && src.height() == height) return src;

  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  Image dst(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx =
          std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double ax = fx - x0;
      const double top = (1.0 - ax) * src(y0, x0) + ax * src(y0, x1);
      const double bottom = (1.0 - ax) * src(y1, x0) + ax * src(y1, x1);
      dst(y, x) = (1.0 - ay) * top + ay * bottom;
    }
  }
  return dst;
}

ImageSample load_image(const std::filesystem::path& path, int target_width, int target_height,
                       Modality modality, std::string subject_id) {
  if (target_width <= 0 || target_height <= 0) {
    throw Error("load_image: target dimensions must be positive");
  }
  Image image = resize_bilinear(read_image_file(path), target_width, target_height);
  return ImageSample(image.clamped(), modality, std::move(subject_id));
}

namespace {

std::vector<unsigned char> to_bytes(const Image& image) {
  std::vector<unsigned char> out(image.size());
  const auto px = image.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::lround(std::clamp(px[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Image& image) {
  if (image.empty()) throw Error("write_pgm: empty image");
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  const std::vector<unsigned char> raster = to_bytes(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.empty()) throw Error("write_png: empty image");
  std::vector<unsigned char> raster = to_bytes(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, raster.data(), 0, nullptr)) {
    throw Error("cannot write PNG '" + path.string() + "': " + png.message);
  }
}

}  // namespace mbio
