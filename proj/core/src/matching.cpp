#include "mbio/matching.hpp"

#include <cmath>
#include <limits>

namespace mbio {

double euclidean(const FeatureVector& a, const FeatureVector& b) {
  if (a.modality != b.modality) throw Error("euclidean: modality mismatch");
  if (a.weights.size() != b.weights.size()) throw Error("euclidean: length mismatch");
  return (a.weights - b.weights).norm();
}

DecisionPolicy::DecisionPolicy(double threshold) : threshold_(threshold) {
  if (!(threshold >= 0.0)) throw Error("decision threshold must be nonnegative");
}

std::string_view to_string(DecisionReason reason) {
  switch (reason) {
    case DecisionReason::UnderThreshold: return "under-threshold";
    case DecisionReason::OverThreshold: return "over-threshold";
    case DecisionReason::QualityRejected: return "quality-rejected";
  }
  return "unknown";
}

Decision Decision::from_score(MatchScore score, const DecisionPolicy& policy) {
  const bool accept = score.distance <= policy.threshold();
  const DecisionReason reason =
      accept ? DecisionReason::UnderThreshold : DecisionReason::OverThreshold;
  return Decision(accept, std::move(score), reason);
}

Decision Decision::quality_rejected(Modality modality) {
  return Decision(false,
                  MatchScore{std::numeric_limits<double>::infinity(), std::string(), modality},
                  DecisionReason::QualityRejected);
}

MatchScore nearest(std::span<const FeatureVector> gallery, const FeatureVector& probe) {
  if (gallery.empty()) throw Error("identify: empty gallery");
  const FeatureVector* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const FeatureVector& t : gallery) {
    if (t.subject_id.empty()) throw Error("identify: gallery template without subject label");
    const double d = euclidean(t, probe);
    if (best == nullptr || d < best_distance ||
        (d == best_distance && t.subject_id < best->subject_id)) {
      best = &t;
      best_distance = d;
    }
  }
  return MatchScore{best_distance, best->subject_id, probe.modality};
}

Decision identify(std::span<const FeatureVector> gallery, const FeatureVector& probe,
                  const DecisionPolicy& policy) {
  return Decision::from_score(nearest(gallery, probe), policy);
}

double distance_to_subject(std::span<const FeatureVector> gallery, std::string_view claimed,
                           const FeatureVector& probe) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const FeatureVector& t : gallery) {
    if (t.subject_id != claimed) continue;
    found = true;
    best = std::min(best, euclidean(t, probe));
  }
  if (!found) throw Error("unknown subject '" + std::string(claimed) + "'");
  return best;
}

Decision verify(std::string_view claimed, std::span<const FeatureVector> gallery,
                const FeatureVector& probe, const DecisionPolicy& policy) {
  const double d = distance_to_subject(gallery, claimed, probe);
  return Decision::from_score(MatchScore{d, std::string(claimed), probe.modality}, policy);
}

}  // namespace mbio
