#pragma once

#include <span>
#include <string>
#include <string_view>

#include "mbio/eigenspace.hpp"

namespace mbio {

double euclidean(const FeatureVector& a, const FeatureVector& b);

struct MatchScore {
  double distance = 0.0;
  std::string matched_subject;
  Modality probe_modality = Modality::Face;
};

/// Distance bound for a single modality; accept when distance <= threshold.
class DecisionPolicy {
 public:
  explicit DecisionPolicy(double threshold);
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

enum class DecisionReason { UnderThreshold, OverThreshold, QualityRejected };

std::string_view to_string(DecisionReason reason);

class Decision {
 public:
  static Decision from_score(MatchScore score, const DecisionPolicy& policy);
  static Decision quality_rejected(Modality modality);

  bool accept() const { return accept_; }
  const MatchScore& score() const { return score_; }
  DecisionReason reason() const { return reason_; }

 private:
  Decision(bool accept, MatchScore score, DecisionReason reason)
      : accept_(accept), score_(std::move(score)), reason_(reason) {}

  bool accept_;
  MatchScore score_;
  DecisionReason reason_;
};

/// Nearest template over the whole gallery. Equal distances resolve to the
/// lexicographically smallest subject label.
MatchScore nearest(std::span<const FeatureVector> gallery, const FeatureVector& probe);

Decision identify(std::span<const FeatureVector> gallery, const FeatureVector& probe,
                  const DecisionPolicy& policy);

/// Minimum distance over the claimed subject's templates.
double distance_to_subject(std::span<const FeatureVector> gallery,
                           std::string_view claimed, const FeatureVector& probe);

Decision verify(std::string_view claimed, std::span<const FeatureVector> gallery,
                const FeatureVector& probe, const DecisionPolicy& policy);

}  // namespace mbio
