#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mbio/evaluation.hpp"
#include "mbio/experiment.hpp"
#include "mbio/gallery.hpp"
#include "mbio/types.hpp"

namespace mbio::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Image random_image(std::mt19937_64& rng, int width, int height, double lo = 0.0, double hi = 1.0);
std::vector<ImageSample> random_gallery(std::mt19937_64& rng, int count, int width, int height,
                                        Modality modality = Modality::Face);

// Oracles ---------------------------------------------------------------

/// Population covariance (1/M) sum (x - mean)(x - mean)^T built with loops.
Eigen::MatrixXd explicit_covariance(const std::vector<ImageSample>& gallery);

struct OracleSpectrum {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;
};

/// Full eigendecomposition of the explicit covariance through Eigen's
/// self-adjoint solver, sorted descending.
OracleSpectrum oracle_spectrum(const std::vector<ImageSample>& gallery);

double ncc_loop(const Image& f, const Image& g);

/// Naive count of attempts; recognition uses the given protocol semantics.
Counts count_attempts(const std::vector<AttemptRecord>& attempts, Protocol protocol);

// Synthetic datasets ----------------------------------------------------

struct SyntheticOptions {
  int subjects = 5;
  int samples_per_subject = 7;
  ImageSize face_size{8, 6};
  ImageSize ear_size{6, 8};
  int noise = 2;           // per-pixel noise amplitude in 8-bit levels
  std::uint32_t seed = 20240601;
  /// (a, b): subject b reuses subject a's face pattern, making b ambiguous.
  std::optional<std::pair<int, int>> face_clone;
};

struct SyntheticDataset {
  std::vector<std::string> subjects;
  /// base[modality][subject]: the noiseless pattern in 8-bit levels.
  std::vector<std::vector<std::vector<int>>> base;
  /// Smallest base-pattern distance between different subjects, over both
  /// modalities, in 8-bit levels.
  double min_separation = 0.0;
  /// Largest sample-to-base distance, in 8-bit levels.
  double max_noise = 0.0;
};

/// Writes root/sNN/{face,ear}/NN.pgm. Pixel bytes come straight from
/// std::mt19937 output, so files are byte-identical on every platform.
SyntheticDataset write_synthetic_dataset(const std::filesystem::path& root,
                                         const SyntheticOptions& options);

/// Models, store and probe attempts built in-process from a synthetic
/// dataset, the same way the CLI does it.
struct Pipeline {
  DatasetManifest manifest;
  std::optional<EigenModel> face;
  std::optional<EigenModel> ear;
  EnrollmentStore store;
  std::vector<ProbeAttempt> attempts;
};

Pipeline build_pipeline(const std::filesystem::path& root, const SyntheticOptions& options,
                        Split split, int samples_per_modality = 3);

/// Bytes of a PGM file at `path`.
std::vector<unsigned char> file_bytes(const std::filesystem::path& path);

}  // namespace mbio::testing
