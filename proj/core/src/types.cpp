#include "mbio/types.hpp"

#include <algorithm>
#include <cmath>

namespace mbio {

std::string_view to_string(Modality m) {
  return m == Modality::Face ? "face" : "ear";
}

Modality parse_modality(std::string_view text) {
  if (text == "face" || text == "Face") return Modality::Face;
  if (text == "ear" || text == "Ear") return Modality::Ear;
  throw Error("unknown modality '" + std::string(text) + "'");
}

Image::Image(int width, int height)
    : Image(width, height,
            std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                static_cast<std::size_t>(std::max(height, 0)))) {}

Image::Image(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw Error("image dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height));
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("pixel count does not match " + std::to_string(width) + "x" +
                std::to_string(height));
  }
}

Image Image::clamped() const {
  Image out = *this;
  for (double& v : out.pixels_) v = std::clamp(v, 0.0, 1.0);
  return out;
}

ImageSample::ImageSample(Image image, Modality modality, std::string subject_id)
    : image_(std::move(image)), modality_(modality), subject_id_(std::move(subject_id)) {
  if (image_.empty()) throw Error("image sample is empty");
  for (double v : image_.pixels()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error("image sample intensity outside [0,1]");
    }
  }
}

}  // namespace mbio
