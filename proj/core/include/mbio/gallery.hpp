#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbio/eigenspace.hpp"
#include "mbio/types.hpp"

namespace mbio {

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline constexpr ImageSize kDefaultFaceSize{150, 200};
inline constexpr ImageSize kDefaultEarSize{100, 150};

ImageSize parse_image_size(std::string_view text);  // "WxH"

struct SubjectEntry {
  std::string subject_id;
  std::vector<std::filesystem::path> face;
  std::vector<std::filesystem::path> ear;
  bool flagged = false;  // a modality has no samples

  const std::vector<std::filesystem::path>& paths(Modality m) const {
    return m == Modality::Face ? face : ear;
  }
  friend bool operator==(const SubjectEntry&, const SubjectEntry&) = default;
};

/// Layout: root/<subject>/{face,ear}/<file>.{pgm,png}. Subjects and files
/// are sorted lexicographically.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SubjectEntry> subjects;
  std::vector<std::string> warnings;
  ImageSize face_size = kDefaultFaceSize;
  ImageSize ear_size = kDefaultEarSize;

  ImageSize size(Modality m) const { return m == Modality::Face ? face_size : ear_size; }
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

DatasetManifest scan_dataset(const std::filesystem::path& root);

// Image files -----------------------------------------------------------

/// Decodes a PGM (P5, maxval 255) or PNG file into [0,1] grayscale. Color PNGs
/// are reduced with Y = 0.299R + 0.587G + 0.114B.
Image read_image_file(const std::filesystem::path& path);

Image decode_pgm(std::span<const unsigned char> bytes);

/// Bilinear resampling with pixel centers at (i + 0.5) * src / dst - 0.5,
/// edge samples clamped.
Image resize_bilinear(const Image& src, int width, int height);

ImageSample load_image(const std::filesystem::path& path, int target_width,
                       int target_height, Modality modality = Modality::Face,
                       std::string subject_id = {});

/// 8-bit export; values are clamped to [0,1] and rounded.
void write_pgm(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);

// Enrollment ------------------------------------------------------------

/// Templates for both modalities, each bound to the digest of the model that
/// produced it.
class EnrollmentStore {
 public:
  void enroll(const EigenModel& model, std::span<const ImageSample> samples,
              const std::string& subject_id);

  std::span<const FeatureVector> templates(Modality m) const;
  std::vector<std::string> subjects(Modality m) const;
  bool has_subject(Modality m, std::string_view subject) const;
  std::optional<std::string> model_digest(Modality m) const;

  const std::string& created_at() const { return created_at_; }
  void set_created_at(std::string stamp) { created_at_ = std::move(stamp); }

  /// Called by the loader; checks the digest against any previously bound model.
  void bind(Modality m, std::string digest);
  void add_template(FeatureVector fv);

 private:
  struct Block {
    std::optional<std::string> digest;
    std::vector<FeatureVector> templates;
  };
  Block& block(Modality m) { return m == Modality::Face ? face_ : ear_; }
  const Block& block(Modality m) const { return m == Modality::Face ? face_ : ear_; }

  Block face_;
  Block ear_;
  std::string created_at_;
};

std::string store_to_json(const EnrollmentStore& store);

/// Rejects the store if a modality's digest differs from the given model, or
/// if a template length differs from that model's k. Null models skip checks
/// for that modality.
EnrollmentStore store_from_json(std::string_view text, const EigenModel* face_model,
                                const EigenModel* ear_model);

void save_store(const std::filesystem::path& path, const EnrollmentStore& store);
EnrollmentStore load_store(const std::filesystem::path& path, const EigenModel* face_model,
                           const EigenModel* ear_model);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mbio
