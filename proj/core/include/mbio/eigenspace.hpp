#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mbio/types.hpp"

namespace mbio {

/// Projection coefficients of one sample in an EigenModel subspace. Enrolled
/// templates carry the subject label; probes may leave it empty.
struct FeatureVector {
  Eigen::VectorXd weights;
  Modality modality = Modality::Face;
  std::string subject_id;
};

/// Trained Karhunen-Loeve subspace for one modality. Immutable once built.
///
/// The constructor checks shapes, eigenvalue ordering and non-negativity.
/// Orthonormality of the basis is guaranteed by `train`; models loaded from
/// disk are checked by `load_model`.
class EigenModel {
 public:
  EigenModel(Modality modality, int width, int height, Eigen::VectorXd mean,
             Eigen::MatrixXd basis, Eigen::VectorXd eigenvalues);

  Modality modality() const { return modality_; }
  int image_width() const { return width_; }
  int image_height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t k() const { return static_cast<std::size_t>(basis_.cols()); }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  Image mean_image() const;

  /// max |B^T B - I| over all entries.
  double orthonormality_error() const;

 private:
  Modality modality_;
  int width_;
  int height_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigenvalues_;
};

/// Component-count policy for training. With no explicit cap, the smallest
/// k whose cumulative eigenvalue fraction reaches `variance_fraction` is kept.
struct TrainOptions {
  std::optional<std::size_t> max_components;
  double variance_fraction = 0.95;
};

struct TrainResult {
  EigenModel model;
  std::size_t rank = 0;         // nonzero eigenvalues found
  double total_variance = 0.0;  // trace of the covariance
  double retained_variance = 0.0;

  double retained_fraction() const {
    return total_variance > 0.0 ? retained_variance / total_variance : 0.0;
  }
};

/// Trains a subspace keeping min(k, M-1, rank) components. Uses the M x M Gram
/// matrix when the gallery has fewer images than pixels, and the explicit
/// pixel covariance otherwise. Covariance is normalized by 1/M.
///
/// Throws Error on an empty gallery, mixed modality or dimensions, k == 0,
/// or a gallery whose centered data is zero ("degenerate gallery").
EigenModel train(std::span<const ImageSample> gallery, std::size_t k);

TrainResult train_with_report(std::span<const ImageSample> gallery, std::size_t k);
TrainResult train_with_report(std::span<const ImageSample> gallery,
                              const TrainOptions& options);

/// Smallest count whose cumulative share of `spectrum` reaches `fraction`.
std::size_t components_for_variance(const Eigen::VectorXd& spectrum, double fraction);

/// basis^T (x - mean).
FeatureVector project(const EigenModel& model, const ImageSample& sample);
Eigen::VectorXd project_centered(const EigenModel& model, const Eigen::VectorXd& offset);

struct Reconstruction {
  Image image;  // mean + basis * weights, unclamped
  Modality modality = Modality::Face;
  bool in_unit_range = true;

  /// Exportable sample; values outside [0,1] are clamped.
  ImageSample to_sample() const;
};

Reconstruction reconstruct(const EigenModel& model, const FeatureVector& fv);

Eigen::VectorXd flatten(const Image& image);

// Persistence. Format: JSON, format_version 1, basis stored column-major.

std::string model_to_json(const EigenModel& model);
EigenModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const EigenModel& model);
EigenModel load_model(const std::filesystem::path& path);

/// Hex SHA-256 of the canonical JSON serialization.
std::string model_digest(const EigenModel& model);

}  // namespace mbio
