#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbio {

/// Raised for every contract violation in the library: bad arguments,
/// malformed files, degenerate data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Modality { Face, Ear };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

/// Grayscale pixel matrix stored row-major. No range constraint; see
/// ImageSample for the validated [0,1] form.
class Image {
 public:
  Image() = default;
  Image(int width, int height);
  Image(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double operator()(int row, int col) const { return pixels_[index(row, col)]; }
  double& operator()(int row, int col) { return pixels_[index(row, col)]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Copy with every value clamped into [0,1].
  Image clamped() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// A captured biometric sample: a non-empty image with every intensity in
/// [0,1], tagged with its modality and (for enrolled data) a subject label.
class ImageSample {
 public:
  ImageSample(Image image, Modality modality, std::string subject_id = {});

  const Image& image() const { return image_; }
  Modality modality() const { return modality_; }
  const std::string& subject_id() const { return subject_id_; }
  int width() const { return image_.width(); }
  int height() const { return image_.height(); }

 private:
  Image image_;
  Modality modality_;
  std::string subject_id_;
};

}  // namespace mbio
