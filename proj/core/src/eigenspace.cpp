#include "mbio/eigenspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbio/linalg.hpp"

namespace mbio {
namespace {

// Relative noise floor below which an eigenvalue counts as zero rank.
constexpr double kRankTolerance = 1e-12;
// Pixels live in [0,1]; a leading eigenvalue this small is rounding noise
// from the mean of identical images.
constexpr double kDegenerateFloor = 1e-20;

struct Spectrum {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // all nonzero-rank components
  Eigen::VectorXd eigenvalues;
  double total_variance = 0.0;
};

void check_gallery(std::span<const ImageSample> gallery) {
  if (gallery.empty()) throw Error("train: empty gallery");
  const ImageSample& first = gallery.front();
  for (const ImageSample& s : gallery) {
    if (s.modality() != first.modality()) throw Error("train: gallery mixes modalities");
    if (!s.image().same_shape(first.image())) throw Error("train: gallery mixes image dimensions");
  }
}

Spectrum decompose(std::span<const ImageSample> gallery) {
  check_gallery(gallery);
  const auto m = static_cast<Eigen::Index>(gallery.size());
  const auto d = static_cast<Eigen::Index>(gallery.front().image().size());

  Eigen::MatrixXd centered(d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    centered.col(i) = flatten(gallery[static_cast<std::size_t>(i)].image());
  }
  Spectrum out;
  out.mean = centered.rowwise().sum() / static_cast<double>(m);
  centered.colwise() -= out.mean;
  const double inv_m = 1.0 / static_cast<double>(m);
  out.total_variance = centered.squaredNorm() * inv_m;

  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  const bool use_gram = m < d;
  if (use_gram) {
    const Eigen::MatrixXd gram = (centered.transpose() * centered) * inv_m;
    SymmetricEigen eig = symmetric_eigen(gram);
    values = std::move(eig.values);
    vectors = centered * eig.vectors;
  } else {
    const Eigen::MatrixXd covariance = (centered * centered.transpose()) * inv_m;
    SymmetricEigen eig = symmetric_eigen(covariance);
    values = std::move(eig.values);
    vectors = std::move(eig.vectors);
  }

  if (values.size() == 0 || !(values(0) > kDegenerateFloor)) {
    throw Error("degenerate gallery: centered data has no nonzero variance");
  }
  const double cutoff = kRankTolerance * values(0);
  Eigen::Index rank = 0;
  while (rank < values.size() && rank < m - 1 && values(rank) > cutoff) ++rank;

  out.basis = vectors.leftCols(rank);
  if (use_gram) {
    for (Eigen::Index j = 0; j < rank; ++j) out.basis.col(j).normalize();
  }
  orthonormalize_columns(out.basis);
  canonicalize_signs(out.basis);
  out.eigenvalues = values.head(rank);
  return out;
}

EigenModel truncate(const ImageSample& exemplar, const Spectrum& s, std::size_t k) {
  const auto keep = static_cast<Eigen::Index>(
      std::min<std::size_t>(k, static_cast<std::size_t>(s.eigenvalues.size())));
  return EigenModel(exemplar.modality(), exemplar.width(), exemplar.height(), s.mean,
                    s.basis.leftCols(keep), s.eigenvalues.head(keep));
}

TrainResult make_result(const ImageSample& exemplar, const Spectrum& s, std::size_t k) {
  EigenModel model = truncate(exemplar, s, k);
  const double retained = model.eigenvalues().sum();
  return TrainResult{std::move(model), static_cast<std::size_t>(s.eigenvalues.size()),
                     s.total_variance, retained};
}

}  // namespace

EigenModel::EigenModel(Modality modality, int width, int height, Eigen::VectorXd mean,
                       Eigen::MatrixXd basis, Eigen::VectorXd eigenvalues)
    : modality_(modality),
      width_(width),
      height_(height),
      mean_(std::move(mean)),
      basis_(std::move(basis)),
      eigenvalues_(std::move(eigenvalues)) {
  if (width <= 0 || height <= 0) throw Error("model dimensions must be positive");
  const auto d = static_cast<Eigen::Index>(width) * height;
  if (mean_.size() != d) throw Error("model mean length does not match width*height");
  if (basis_.rows() != d) throw Error("model basis rows do not match width*height");
  if (eigenvalues_.size() != basis_.cols()) throw Error("model eigenvalue count does not match k");
  if (basis_.cols() == 0) throw Error("model has no components");
  for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) {
    if (!(eigenvalues_(j) >= 0.0)) throw Error("model eigenvalues must be nonnegative");
    if (j > 0 && eigenvalues_(j) > eigenvalues_(j - 1)) {
      throw Error("model eigenvalues must be non-increasing");
    }
  }
}

Image EigenModel::mean_image() const {
  return Image(width_, height_, std::vector<double>(mean_.data(), mean_.data() + mean_.size()));
}

double EigenModel::orthonormality_error() const {
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

EigenModel train(std::span<const ImageSample> gallery, std::size_t k) {
  return train_with_report(gallery, k).model;
}

TrainResult train_with_report(std::span<const ImageSample> gallery, std::size_t k) {
  if (k == 0) throw Error("train: requested component count must be at least 1");
  const Spectrum s = decompose(gallery);
  return make_result(gallery.front(), s, k);
}

TrainResult train_with_report(std::span<const ImageSample> gallery,
                              const TrainOptions& options) {
  if (!(options.variance_fraction > 0.0 && options.variance_fraction <= 1.0)) {
    throw Error("train: variance fraction must lie in (0,1]");
  }
  if (options.max_components && *options.max_components == 0) {
    throw Error("train: requested component count must be at least 1");
  }
  const Spectrum s = decompose(gallery);
  std::size_t k = components_for_variance(s.eigenvalues, options.variance_fraction);
  if (options.max_components) k = std::min(k, *options.max_components);
  return make_result(gallery.front(), s, k);
}

std::size_t components_for_variance(const Eigen::VectorXd& spectrum, double fraction) {
  const double total = spectrum.sum();
  if (spectrum.size() == 0 || !(total > 0.0)) return 0;
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
    cumulative += spectrum(j);
    if (cumulative >= fraction * total) return static_cast<std::size_t>(j + 1);
  }
  return static_cast<std::size_t>(spectrum.size());
}

Eigen::VectorXd flatten(const Image& image) {
  const auto px = image.pixels();
  return Eigen::Map<const Eigen::VectorXd>(px.data(), static_cast<Eigen::Index>(px.size()));
}

Eigen::VectorXd project_centered(const EigenModel& model, const Eigen::VectorXd& offset) {
  if (static_cast<std::size_t>(offset.size()) != model.pixel_count()) {
    throw Error("project: vector length does not match model");
  }
  return model.basis().transpose() * offset;
}

FeatureVector project(const EigenModel& model, const ImageSample& sample) {
  if (sample.modality() != model.modality()) throw Error("project: modality mismatch");
  if (sample.width() != model.image_width() || sample.height() != model.image_height()) {
    throw Error("project: image dimensions do not match model");
  }
  return FeatureVector{project_centered(model, flatten(sample.image()) - model.mean()),
                       sample.modality(), sample.subject_id()};
}

ImageSample Reconstruction::to_sample() const {
  return ImageSample(image.clamped(), modality);
}

Reconstruction reconstruct(const EigenModel& model, const FeatureVector& fv) {
  if (fv.modality != model.modality()) throw Error("reconstruct: modality mismatch");
  if (static_cast<std::size_t>(fv.weights.size()) != model.k()) {
    throw Error("reconstruct: feature length does not match model k");
  }
  const Eigen::VectorXd x = model.mean() + model.basis() * fv.weights;
  Reconstruction out{Image(model.image_width(), model.image_height(),
                           std::vector<double>(x.data(), x.data() + x.size())),
                     model.modality(), true};
  out.in_unit_range = (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
  return out;
}

}  // namespace mbio
