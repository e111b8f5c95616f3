#pragma once

#include <span>
#include <vector>

#include "mbio/matching.hpp"

namespace mbio {

/// Votes per modality and the accept count needed for a modality to accept.
/// Defaults are three samples, two votes.
class FusionPolicy {
 public:
  FusionPolicy() = default;
  FusionPolicy(int samples_per_modality, int majority_min);

  int samples_per_modality() const { return samples_; }
  int majority_min() const { return majority_; }

 private:
  int samples_ = 3;
  int majority_ = 2;
};

struct ModalityVerdict {
  Modality modality = Modality::Face;
  std::vector<Decision> votes;
  bool accept = false;

  int accept_count() const;
};

struct FusedDecision {
  ModalityVerdict face;
  ModalityVerdict ear;
  bool accept = false;
};

ModalityVerdict majority(std::span<const Decision> votes, const FusionPolicy& policy);

/// AND of the two verdicts. Accepts them in either order; two verdicts of
/// the same modality are an error.
FusedDecision and_fuse(ModalityVerdict face, ModalityVerdict ear);

FusedDecision fuse_attempt(std::span<const Decision> face_votes,
                           std::span<const Decision> ear_votes,
                           const FusionPolicy& policy);

}  // namespace mbio
