#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include <unistd.h>

namespace mbio::testing {
namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("mbio-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Image random_image(std::mt19937_64& rng, int width, int height, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Image img(width, height);
  for (double& v : img.pixels()) v = dist(rng);
  return img;
}

std::vector<ImageSample> random_gallery(std::mt19937_64& rng, int count, int width, int height,
                                        Modality modality) {
  std::vector<ImageSample> out;
  for (int i = 0; i < count; ++i) {
    out.emplace_back(random_image(rng, width, height), modality, "g" + std::to_string(i));
  }
  return out;
}

Eigen::MatrixXd explicit_covariance(const std::vector<ImageSample>& gallery) {
  const std::size_t m = gallery.size();
  const std::size_t d = gallery.front().image().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& s : gallery)
    for (std::size_t p = 0; p < d; ++p) mean[p] += s.image().pixels()[p];
  for (double& v : mean) v /= static_cast<double>(m);

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& s : gallery) {
    const auto px = s.image().pixels();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            (px[i] - mean[i]) * (px[j] - mean[j]);
  }
  return c / static_cast<double>(m);
}

OracleSpectrum oracle_spectrum(const std::vector<ImageSample>& gallery) {
  const Eigen::MatrixXd c = explicit_covariance(gallery);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  const Eigen::Index n = c.rows();
  OracleSpectrum out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {  // solver returns ascending order
    out.values(j) = solver.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  return out;
}

double ncc_loop(const Image& f, const Image& g) {
  double num = 0.0, ff = 0.0, gg = 0.0;
  for (int r = 0; r < f.height(); ++r) {
    for (int c = 0; c < f.width(); ++c) {
      num += f(r, c) * g(r, c);
      ff += f(r, c) * f(r, c);
      gg += g(r, c) * g(r, c);
    }
  }
  return num / (std::sqrt(ff) * std::sqrt(gg));
}

Counts count_attempts(const std::vector<AttemptRecord>& attempts, Protocol protocol) {
  Counts c;
  for (const auto& a : attempts) {
    const bool genuine = a.true_subject == a.claimed_subject;
    c.genuine_total += genuine ? 1 : 0;
    c.impostor_total += genuine ? 0 : 1;
    c.genuine_accepted += (genuine && a.accept) ? 1 : 0;
    c.impostor_accepted += (!genuine && a.accept) ? 1 : 0;
    const bool right = protocol == Protocol::Verification ||
                       (a.matched_subject.has_value() && *a.matched_subject == a.true_subject);
    c.genuine_recognized += (genuine && a.accept && right) ? 1 : 0;
  }
  return c;
}

namespace {

void write_pgm_bytes(const fs::path& path, ImageSize size, const std::vector<int>& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << size.width << ' ' << size.height << "\n255\n";
  for (int b : bytes) out.put(static_cast<char>(static_cast<unsigned char>(b)));
}

double level_distance(const std::vector<int>& a, const std::vector<int>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += double(a[i] - b[i]) * double(a[i] - b[i]);
  return std::sqrt(sum);
}

std::string two_digits(int n) { return (n < 10 ? "0" : "") + std::to_string(n); }

}  // namespace

SyntheticDataset write_synthetic_dataset(const fs::path& root, const SyntheticOptions& options) {
  std::mt19937 gen(options.seed);
  SyntheticDataset ds;
  ds.base.resize(2);
  for (int s = 0; s < options.subjects; ++s) ds.subjects.push_back("s" + two_digits(s + 1));

  const ImageSize sizes[2] = {options.face_size, options.ear_size};
  for (int m = 0; m < 2; ++m) {
    const auto pixels = static_cast<std::size_t>(sizes[m].width * sizes[m].height);
    for (int s = 0; s < options.subjects; ++s) {
      std::vector<int> base(pixels);
      for (int& v : base) v = 40 + static_cast<int>(gen() % 176u);
      if (m == 0 && options.face_clone && options.face_clone->second == s) {
        base = ds.base[0][static_cast<std::size_t>(options.face_clone->first)];
      }
      ds.base[static_cast<std::size_t>(m)].push_back(std::move(base));
    }
  }

  ds.min_separation = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 2; ++m) {
    const auto& bases = ds.base[static_cast<std::size_t>(m)];
    for (std::size_t a = 0; a < bases.size(); ++a)
      for (std::size_t b = a + 1; b < bases.size(); ++b)
        ds.min_separation = std::min(ds.min_separation, level_distance(bases[a], bases[b]));
  }

  const int span = 2 * options.noise + 1;
  for (int s = 0; s < options.subjects; ++s) {
    for (int m = 0; m < 2; ++m) {
      const auto& base = ds.base[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
      for (int j = 0; j < options.samples_per_subject; ++j) {
        std::vector<int> bytes(base.size());
        for (std::size_t p = 0; p < base.size(); ++p) {
          bytes[p] = base[p] + static_cast<int>(gen() % static_cast<unsigned>(span)) - options.noise;
        }
        ds.max_noise = std::max(ds.max_noise, level_distance(bytes, base));
        write_pgm_bytes(root / ds.subjects[static_cast<std::size_t>(s)] / (m == 0 ? "face" : "ear") /
                            (two_digits(j + 1) + ".pgm"),
                        sizes[m], bytes);
      }
    }
  }
  return ds;
}

std::vector<unsigned char> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

Pipeline build_pipeline(const fs::path& root, const SyntheticOptions& options, Split split,
                        int samples_per_modality) {
  write_synthetic_dataset(root, options);
  Pipeline p;
  p.manifest = scan_dataset(root);
  p.manifest.face_size = options.face_size;
  p.manifest.ear_size = options.ear_size;
  const auto parts = partition(p.manifest, SplitOptions{split, std::nullopt});
  TrainOptions train_options;
  train_options.variance_fraction = 1.0;
  p.face = train_with_report(training_gallery(p.manifest, parts, Modality::Face), train_options).model;
  p.ear = train_with_report(training_gallery(p.manifest, parts, Modality::Ear), train_options).model;
  for (const PartitionedSubject& part : parts) {
    p.store.enroll(*p.face, load_samples(part.face_train, options.face_size, Modality::Face, part.subject_id),
                   part.subject_id);
    p.store.enroll(*p.ear, load_samples(part.ear_train, options.ear_size, Modality::Ear, part.subject_id),
                   part.subject_id);
  }
  p.attempts = build_probe_attempts(p.manifest, parts, samples_per_modality);
  return p;
}

}  // namespace mbio::testing
