#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mbio {

/// How recognition rate is counted. Verification: genuine attempts accepted.
/// Identification: genuine attempts accepted whose rank-1 subject is correct.
enum class Protocol { Identification, Verification };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

enum class AttemptKind { Genuine, Impostor };

struct AttemptRecord {
  std::string true_subject;
  std::string claimed_subject;
  bool accept = false;
  /// Rank-1 subject; only consulted under the identification protocol.
  std::optional<std::string> matched_subject;

  AttemptKind kind() const {
    return true_subject == claimed_subject ? AttemptKind::Genuine : AttemptKind::Impostor;
  }
};

struct Counts {
  std::size_t genuine_total = 0;
  std::size_t genuine_accepted = 0;
  std::size_t genuine_recognized = 0;
  std::size_t impostor_total = 0;
  std::size_t impostor_accepted = 0;

  std::size_t genuine_rejected() const { return genuine_total - genuine_accepted; }
  std::size_t impostor_rejected() const { return impostor_total - impostor_accepted; }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct EvaluationReport {
  Protocol protocol = Protocol::Verification;
  std::optional<double> threshold;  // unimodal operating point
  std::optional<double> threshold_face;
  std::optional<double> threshold_ear;
  double recognition_rate = 0.0;
  double far = 0.0;
  double frr = 0.0;
  Counts counts;
};

EvaluationReport report_from_counts(const Counts& counts, Protocol protocol);

/// Throws on an empty attempt list.
EvaluationReport rates(std::span<const AttemptRecord> attempts,
                       Protocol protocol = Protocol::Verification);

/// One claim scored by a distance; accept at threshold t when score <= t.
struct ScoredAttempt {
  std::string true_subject;
  std::string claimed_subject;
  double score = 0.0;
  std::optional<std::string> rank1_subject;

  bool genuine() const { return true_subject == claimed_subject; }
};

/// Score-only sweep under the verification protocol. Thresholds must be
/// sorted ascending; both score lists must be non-empty.
std::vector<EvaluationReport> sweep(std::span<const double> genuine_scores,
                                    std::span<const double> impostor_scores,
                                    std::span<const double> thresholds);

std::vector<EvaluationReport> sweep_attempts(std::span<const ScoredAttempt> attempts,
                                             std::span<const double> thresholds,
                                             Protocol protocol);

/// 0 followed by every distinct finite score, ascending.
std::vector<double> candidate_thresholds(std::span<const double> scores);

/// Highest recognition rate; ties go to the smaller threshold.
EvaluationReport best_threshold(std::span<const EvaluationReport> reports);

void write_sweep_csv(std::ostream& out, std::span<const EvaluationReport> reports);

/// Three-column table: Face, Ear, Multimodal Fusion by
/// Recognition Rate, FAR, FRR.
std::string format_table(const EvaluationReport& face, const EvaluationReport& ear,
                         const EvaluationReport& fused);

std::string format_percent(double rate);

}  // namespace mbio
