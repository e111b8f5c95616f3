#include "mbio/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "mbio/quality.hpp"

namespace mbio {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

int parse_positive(std::string_view text) {
  int value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value <= 0) {
    throw Error("split counts must be positive integers");
  }
  return value;
}

struct ModalityContext {
  const EigenModel& model;
  QualityPolicy quality;
  // Templates of claims[c], in store order.
  std::vector<std::vector<const FeatureVector*>> by_claim;
};

ModalityContext make_context(const EigenModel& model, const EnrollmentStore& store,
                             const std::vector<std::string>& claims, double min_ncc) {
  ModalityContext ctx{model, QualityPolicy(min_ncc, model.mean_image()), {}};
  ctx.by_claim.resize(claims.size());
  for (const FeatureVector& t : store.templates(model.modality())) {
    const auto it = std::lower_bound(claims.begin(), claims.end(), t.subject_id);
    if (it == claims.end() || *it != t.subject_id) continue;
    ctx.by_claim[static_cast<std::size_t>(it - claims.begin())].push_back(&t);
  }
  return ctx;
}

SampleScores score_samples(const ModalityContext& ctx, std::span<const ImageSample> samples) {
  SampleScores out;
  const std::size_t claims = ctx.by_claim.size();
  for (const ImageSample& sample : samples) {
    const QualityScore q = assess(ctx.quality, sample);
    out.ncc.push_back(q.ncc);
    out.passed.push_back(q.passed);
    std::vector<double> row(claims, kInf);
    if (q.passed) {
      const FeatureVector probe = project(ctx.model, sample);
      for (std::size_t c = 0; c < claims; ++c) {
        for (const FeatureVector* t : ctx.by_claim[c]) row[c] = std::min(row[c], euclidean(*t, probe));
      }
    }
    out.distances.push_back(std::move(row));
  }
  return out;
}

double order_statistic(const SampleScores& scores, std::size_t claim, int rank) {
  std::vector<double> column;
  column.reserve(scores.distances.size());
  for (const auto& row : scores.distances) column.push_back(row[claim]);
  const auto nth = column.begin() + (rank - 1);
  std::nth_element(column.begin(), nth, column.end());
  return *nth;
}

void scored_attempts(const std::vector<SampleScores>& per_attempt,
                     std::span<const ProbeAttempt> attempts,
                     const std::vector<std::string>& claims, int majority_min,
                     std::vector<ScoredAttempt>& out) {
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    std::vector<double> scores(claims.size());
    std::optional<std::string> rank1;
    double best = kInf;
    for (std::size_t c = 0; c < claims.size(); ++c) {
      scores[c] = order_statistic(per_attempt[i], c, majority_min);
      if (scores[c] < best) {
        best = scores[c];
        rank1 = claims[c];
      }
    }
    for (std::size_t c = 0; c < claims.size(); ++c) {
      out.push_back(ScoredAttempt{attempts[i].subject_id, claims[c], scores[c], rank1});
    }
  }
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = n;
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

json report_json(const EvaluationReport& r) {
  json j;
  if (r.threshold) j["threshold"] = *r.threshold;
  if (r.threshold_face) j["threshold_face"] = *r.threshold_face;
  if (r.threshold_ear) j["threshold_ear"] = *r.threshold_ear;
  j["recognition_rate"] = r.recognition_rate;
  j["far"] = r.far;
  j["frr"] = r.frr;
  j["counts"] = {{"genuine_total", r.counts.genuine_total},
                 {"genuine_accepted", r.counts.genuine_accepted},
                 {"genuine_recognized", r.counts.genuine_recognized},
                 {"impostor_total", r.counts.impostor_total},
                 {"impostor_accepted", r.counts.impostor_accepted}};
  return j;
}

}  // namespace

Split parse_split(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error("split must look like TRAIN:PROBE");
  return Split{parse_positive(text.substr(0, colon)), parse_positive(text.substr(colon + 1))};
}

std::string to_string(const Split& split) {
  return std::to_string(split.train) + ":" + std::to_string(split.probe);
}

std::vector<PartitionedSubject> partition(const DatasetManifest& manifest,
                                          const SplitOptions& options) {
  std::optional<std::mt19937_64> rng;
  if (options.seed) rng.emplace(*options.seed);

  std::vector<PartitionedSubject> out;
  for (const SubjectEntry& subject : manifest.subjects) {
    if (subject.flagged) {
      throw Error("subject '" + subject.subject_id + "' is missing a modality");
    }
    PartitionedSubject part;
    part.subject_id = subject.subject_id;
    for (Modality m : {Modality::Face, Modality::Ear}) {
      std::vector<fs::path> files = subject.paths(m);
      if (rng) std::shuffle(files.begin(), files.end(), *rng);
      auto& train = m == Modality::Face ? part.face_train : part.ear_train;
      auto& probe = m == Modality::Face ? part.face_probe : part.ear_probe;
      if (!options.split) {
        train = std::move(files);
        continue;
      }
      const auto need = static_cast<std::size_t>(options.split->train + options.split->probe);
      if (files.size() != need) {
        throw Error("subject '" + subject.subject_id + "' has " + std::to_string(files.size()) +
                    " " + std::string(to_string(m)) + " samples; split " +
                    to_string(*options.split) + " needs " + std::to_string(need));
      }
      const auto cut = files.begin() + options.split->train;
      train.assign(files.begin(), cut);
      probe.assign(cut, files.end());
    }
    out.push_back(std::move(part));
  }
  return out;
}

std::vector<ImageSample> load_samples(std::span<const fs::path> paths, ImageSize size,
                                      Modality modality, const std::string& subject_id) {
  std::vector<ImageSample> out;
  out.reserve(paths.size());
  for (const fs::path& p : paths) {
    out.push_back(load_image(p, size.width, size.height, modality, subject_id));
  }
  return out;
}

std::vector<ImageSample> training_gallery(const DatasetManifest& manifest,
                                          std::span<const PartitionedSubject> parts,
                                          Modality modality) {
  std::vector<ImageSample> out;
  for (const PartitionedSubject& part : parts) {
    auto samples = load_samples(part.train(modality), manifest.size(modality), modality,
                                part.subject_id);
    std::move(samples.begin(), samples.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<ProbeAttempt> build_probe_attempts(const DatasetManifest& manifest,
                                               std::span<const PartitionedSubject> parts,
                                               int samples_per_modality) {
  if (samples_per_modality < 1) throw Error("samples_per_modality must be positive");
  const auto group = static_cast<std::size_t>(samples_per_modality);
  std::vector<ProbeAttempt> out;
  for (const PartitionedSubject& part : parts) {
    const std::size_t n = std::min(part.face_probe.size(), part.ear_probe.size()) / group;
    for (std::size_t g = 0; g < n; ++g) {
      ProbeAttempt attempt{part.subject_id, {}, {}};
      for (Modality m : {Modality::Face, Modality::Ear}) {
        const auto first = part.probe(m).begin() + static_cast<std::ptrdiff_t>(g * group);
        std::vector<fs::path> chunk(first, first + static_cast<std::ptrdiff_t>(group));
        (m == Modality::Face ? attempt.face : attempt.ear) =
            load_samples(chunk, manifest.size(m), m, part.subject_id);
      }
      out.push_back(std::move(attempt));
    }
  }
  return out;
}

std::vector<Decision> sample_decisions(const SampleScores& scores, std::size_t claim_index,
                                       const std::string& claim, Modality modality,
                                       const DecisionPolicy& policy) {
  std::vector<Decision> votes;
  votes.reserve(scores.distances.size());
  for (std::size_t s = 0; s < scores.distances.size(); ++s) {
    if (!scores.passed[s]) {
      votes.push_back(Decision::quality_rejected(modality));
    } else {
      votes.push_back(Decision::from_score(
          MatchScore{scores.distances[s][claim_index], claim, modality}, policy));
    }
  }
  return votes;
}

ExperimentResult run_experiment(const EigenModel& face_model, const EigenModel& ear_model,
                                const EnrollmentStore& store,
                                std::span<const ProbeAttempt> attempts,
                                const ExperimentConfig& config) {
  if (face_model.modality() != Modality::Face || ear_model.modality() != Modality::Ear) {
    throw Error("run_experiment: models must be one face and one ear model");
  }
  if (attempts.empty()) throw Error("insufficient probes: no complete probe attempts");
  const int spm = config.fusion.samples_per_modality();
  for (const ProbeAttempt& a : attempts) {
    if (static_cast<int>(a.face.size()) != spm || static_cast<int>(a.ear.size()) != spm) {
      throw Error("probe attempt does not have samples_per_modality samples per modality");
    }
  }

  ExperimentResult result;
  result.claims = store.subjects(Modality::Face);
  if (result.claims != store.subjects(Modality::Ear)) {
    throw Error("store face and ear enrollments cover different subjects");
  }
  if (result.claims.empty()) throw Error("store has no enrolled subjects");

  const ModalityContext face_ctx = make_context(face_model, store, result.claims, config.min_ncc);
  const ModalityContext ear_ctx = make_context(ear_model, store, result.claims, config.min_ncc);

  result.face_scores.resize(attempts.size());
  result.ear_scores.resize(attempts.size());
  parallel_for(attempts.size(), config.workers, [&](std::size_t i) {
    result.face_scores[i] = score_samples(face_ctx, attempts[i].face);
    result.ear_scores[i] = score_samples(ear_ctx, attempts[i].ear);
  });

  const int k = config.fusion.majority_min();
  scored_attempts(result.face_scores, attempts, result.claims, k, result.face_attempts);
  scored_attempts(result.ear_scores, attempts, result.claims, k, result.ear_attempts);

  auto sweep_modality = [&](const std::vector<ScoredAttempt>& scored) {
    std::vector<double> scores;
    scores.reserve(scored.size());
    for (const ScoredAttempt& a : scored) scores.push_back(a.score);
    return sweep_attempts(scored, candidate_thresholds(scores), config.protocol);
  };
  result.face_sweep = sweep_modality(result.face_attempts);
  result.ear_sweep = sweep_modality(result.ear_attempts);
  result.face = best_threshold(result.face_sweep);
  result.ear = best_threshold(result.ear_sweep);

  const DecisionPolicy face_policy(*result.face.threshold);
  const DecisionPolicy ear_policy(*result.ear.threshold);
  const std::size_t n_claims = result.claims.size();
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    for (std::size_t c = 0; c < n_claims; ++c) {
      const std::string& claim = result.claims[c];
      const auto face_votes =
          sample_decisions(result.face_scores[i], c, claim, Modality::Face, face_policy);
      const auto ear_votes =
          sample_decisions(result.ear_scores[i], c, claim, Modality::Ear, ear_policy);
      const FusedDecision fused = fuse_attempt(face_votes, ear_votes, config.fusion);

      const auto& face_rank1 = result.face_attempts[i * n_claims + c].rank1_subject;
      const auto& ear_rank1 = result.ear_attempts[i * n_claims + c].rank1_subject;
      std::optional<std::string> matched;
      if (face_rank1 && ear_rank1 && *face_rank1 == *ear_rank1) matched = face_rank1;
      result.fused_records.push_back(
          AttemptRecord{attempts[i].subject_id, claim, fused.accept, std::move(matched)});
    }
  }
  result.fused = rates(result.fused_records, config.protocol);
  result.fused.threshold_face = result.face.threshold;
  result.fused.threshold_ear = result.ear.threshold;
  return result;
}

std::string experiment_to_json(const ExperimentResult& result, const ExperimentConfig& config,
                               const std::optional<Split>& split,
                               const std::optional<std::uint64_t>& seed) {
  json doc;
  doc["format_version"] = 1;
  doc["protocol"] = std::string(to_string(config.protocol));
  doc["split"] = split ? json(to_string(*split)) : json(nullptr);
  doc["seed"] = seed ? json(*seed) : json(nullptr);
  doc["samples_per_modality"] = config.fusion.samples_per_modality();
  doc["majority_min"] = config.fusion.majority_min();
  doc["min_ncc"] = config.min_ncc;
  doc["attempts"] = result.face_scores.size();
  doc["enrolled_subjects"] = result.claims.size();
  doc["face"] = report_json(result.face);
  doc["ear"] = report_json(result.ear);
  doc["fused"] = report_json(result.fused);
  return doc.dump(2) + "\n";
}

}  // namespace mbio
