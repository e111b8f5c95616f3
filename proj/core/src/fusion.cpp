#include "mbio/fusion.hpp"

#include <algorithm>
#include <string>

namespace mbio {

FusionPolicy::FusionPolicy(int samples_per_modality, int majority_min)
    : samples_(samples_per_modality), majority_(majority_min) {
  if (samples_ < 1) throw Error("samples_per_modality must be positive");
  if (majority_ < 1 || majority_ > samples_) {
    throw Error("majority_min must lie in [1, samples_per_modality]");
  }
}

int ModalityVerdict::accept_count() const {
  return static_cast<int>(
      std::count_if(votes.begin(), votes.end(), [](const Decision& d) { return d.accept(); }));
}

ModalityVerdict majority(std::span<const Decision> votes, const FusionPolicy& policy) {
  if (static_cast<int>(votes.size()) != policy.samples_per_modality()) {
    throw Error("majority: expected " + std::to_string(policy.samples_per_modality()) +
                " votes, got " + std::to_string(votes.size()));
  }
  const Modality modality = votes.front().score().probe_modality;
  for (const Decision& d : votes) {
    if (d.score().probe_modality != modality) throw Error("majority: votes mix modalities");
  }
  ModalityVerdict verdict{modality, std::vector<Decision>(votes.begin(), votes.end()), false};
  verdict.accept = verdict.accept_count() >= policy.majority_min();
  return verdict;
}

FusedDecision and_fuse(ModalityVerdict face, ModalityVerdict ear) {
  if (face.modality == ear.modality) throw Error("and_fuse: duplicate modality");
  if (face.modality == Modality::Ear) std::swap(face, ear);
  const bool accept = face.accept && ear.accept;
  return FusedDecision{std::move(face), std::move(ear), accept};
}

FusedDecision fuse_attempt(std::span<const Decision> face_votes,
                           std::span<const Decision> ear_votes, const FusionPolicy& policy) {
  return and_fuse(majority(face_votes, policy), majority(ear_votes, policy));
}

}  // namespace mbio
