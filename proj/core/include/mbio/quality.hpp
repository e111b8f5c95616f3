#pragma once

#include "mbio/types.hpp"

namespace mbio {

/// Correlation of two images as sum(f*g) / (|f| |g|), without mean
/// subtraction. Throws on shape mismatch or an all-zero image.
double ncc(const Image& f, const Image& g);
double ncc(const ImageSample& f, const ImageSample& g);

/// Gate applied before matching. A threshold of 0 admits every sample with
/// nonnegative pixels.
class QualityPolicy {
 public:
  QualityPolicy(double min_ncc, Image reference);

  double min_ncc() const { return min_ncc_; }
  const Image& reference() const { return reference_; }

 private:
  double min_ncc_;
  Image reference_;
};

struct QualityScore {
  double ncc = 0.0;
  bool passed = false;
};

QualityScore assess(const QualityPolicy& policy, const ImageSample& sample);

}  // namespace mbio
