#include "mbio/quality.hpp"

#include <cmath>

namespace mbio {

double ncc(const Image& f, const Image& g) {
  if (!f.same_shape(g)) throw Error("ncc: image dimensions differ");
  const auto fp = f.pixels();
  const auto gp = g.pixels();
  double cross = 0.0;
  double ff = 0.0;
  double gg = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    cross += fp[i] * gp[i];
    ff += fp[i] * fp[i];
    gg += gp[i] * gp[i];
  }
  if (ff == 0.0 || gg == 0.0) throw Error("undefined correlation: all-zero image");
  return cross / (std::sqrt(ff) * std::sqrt(gg));
}

double ncc(const ImageSample& f, const ImageSample& g) { return ncc(f.image(), g.image()); }

QualityPolicy::QualityPolicy(double min_ncc, Image reference)
    : min_ncc_(min_ncc), reference_(std::move(reference)) {
  if (!(min_ncc >= 0.0 && min_ncc <= 1.0)) throw Error("min_ncc must lie in [0,1]");
  if (reference_.empty()) throw Error("quality reference image is empty");
}

QualityScore assess(const QualityPolicy& policy, const ImageSample& sample) {
  if (!sample.image().same_shape(policy.reference())) {
    throw Error("assess: sample dimensions do not match the reference");
  }
  const double score = ncc(sample.image(), policy.reference());
  return QualityScore{score, score >= policy.min_ncc()};
}

}  // namespace mbio
