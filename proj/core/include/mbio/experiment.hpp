#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbio/eigenspace.hpp"
#include "mbio/evaluation.hpp"
#include "mbio/fusion.hpp"
#include "mbio/gallery.hpp"

namespace mbio {

/// Per-subject, per-modality partition of sample files: the first `train`
/// files enroll/train, the next `probe` files are probes.
struct Split {
  int train = 0;
  int probe = 0;
  friend bool operator==(const Split&, const Split&) = default;
};

Split parse_split(std::string_view text);  // "TRAIN:PROBE"
std::string to_string(const Split& split);

struct SplitOptions {
  std::optional<Split> split;          // absent: every file is a training file
  std::optional<std::uint64_t> seed;   // present: shuffle each file list first
};

struct PartitionedSubject {
  std::string subject_id;
  std::vector<std::filesystem::path> face_train, face_probe;
  std::vector<std::filesystem::path> ear_train, ear_probe;

  const std::vector<std::filesystem::path>& train(Modality m) const {
    return m == Modality::Face ? face_train : ear_train;
  }
  const std::vector<std::filesystem::path>& probe(Modality m) const {
    return m == Modality::Face ? face_probe : ear_probe;
  }
};

/// Throws when a split is given and a subject's per-modality file count is not
/// train + probe. Flagged subjects are rejected.
std::vector<PartitionedSubject> partition(const DatasetManifest& manifest,
                                          const SplitOptions& options);

std::vector<ImageSample> load_samples(std::span<const std::filesystem::path> paths,
                                      ImageSize size, Modality modality,
                                      const std::string& subject_id);

/// Training images of every subject for one modality, in manifest order.
std::vector<ImageSample> training_gallery(const DatasetManifest& manifest,
                                          std::span<const PartitionedSubject> parts,
                                          Modality modality);

/// One multi-sample recognition attempt: samples_per_modality images of each
/// modality from the same subject.
struct ProbeAttempt {
  std::string subject_id;
  std::vector<ImageSample> face;
  std::vector<ImageSample> ear;

  const std::vector<ImageSample>& samples(Modality m) const {
    return m == Modality::Face ? face : ear;
  }
};

/// Chunks each subject's probe files into consecutive groups of
/// samples_per_modality. Leftover files that do not fill a group are unused.
std::vector<ProbeAttempt> build_probe_attempts(const DatasetManifest& manifest,
                                               std::span<const PartitionedSubject> parts,
                                               int samples_per_modality);

struct ExperimentConfig {
  FusionPolicy fusion;
  double min_ncc = 0.0;
  Protocol protocol = Protocol::Identification;
  unsigned workers = 1;
};

/// Per-sample measurements for one modality of one attempt.
struct SampleScores {
  std::vector<double> ncc;
  std::vector<bool> passed;
  /// distances[s][c]: sample s against claimed subject c (min over templates);
  /// infinity for samples rejected by the quality gate.
  std::vector<std::vector<double>> distances;
};

struct ExperimentResult {
  std::vector<std::string> claims;  // enrolled subjects, sorted
  std::vector<SampleScores> face_scores, ear_scores;  // one per attempt
  /// Attempt-level scores: the majority_min-th smallest sample distance. A
  /// modality's majority verdict at threshold t accepts iff this is <= t.
  std::vector<ScoredAttempt> face_attempts, ear_attempts;
  std::vector<EvaluationReport> face_sweep, ear_sweep;
  EvaluationReport face, ear, fused;
  std::vector<AttemptRecord> fused_records;
};

/// Scores every attempt against every enrolled subject (genuine plus the full
/// impostor cross-product), sweeps each modality, picks the operating point
/// with the highest recognition rate, and runs decision fusion there.
/// Output does not depend on `workers`.
ExperimentResult run_experiment(const EigenModel& face_model, const EigenModel& ear_model,
                                const EnrollmentStore& store,
                                std::span<const ProbeAttempt> attempts,
                                const ExperimentConfig& config);

/// Majority-vote decisions for one modality of an attempt against one claim.
std::vector<Decision> sample_decisions(const SampleScores& scores, std::size_t claim_index,
                                       const std::string& claim, Modality modality,
                                       const DecisionPolicy& policy);

std::string experiment_to_json(const ExperimentResult& result, const ExperimentConfig& config,
                               const std::optional<Split>& split,
                               const std::optional<std::uint64_t>& seed);

}  // namespace mbio
