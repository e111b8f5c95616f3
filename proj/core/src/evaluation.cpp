#include "mbio/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "mbio/types.hpp"

namespace mbio {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t count_at_most(const std::vector<double>& sorted, double threshold) {
  return static_cast<std::size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin());
}

void check_thresholds(std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error("sweep: no thresholds");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error("sweep: thresholds must be sorted ascending");
  }
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Protocol p) {
  return p == Protocol::Identification ? "identification" : "verification";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "identification") return Protocol::Identification;
  if (text == "verification") return Protocol::Verification;
  throw Error("unknown protocol '" + std::string(text) + "'");
}

EvaluationReport report_from_counts(const Counts& counts, Protocol protocol) {
  EvaluationReport r;
  r.protocol = protocol;
  r.counts = counts;
  r.far = ratio(counts.impostor_accepted, counts.impostor_total);
  r.frr = counts.genuine_total == 0 ? 0.0 : 1.0 - ratio(counts.genuine_accepted, counts.genuine_total);
  r.recognition_rate = ratio(counts.genuine_recognized, counts.genuine_total);
  return r;
}

EvaluationReport rates(std::span<const AttemptRecord> attempts, Protocol protocol) {
  if (attempts.empty()) throw Error("rates: no attempts");
  Counts c;
  for (const AttemptRecord& a : attempts) {
    if (a.kind() == AttemptKind::Genuine) {
      ++c.genuine_total;
      if (!a.accept) continue;
      ++c.genuine_accepted;
      if (protocol == Protocol::Verification ||
          (a.matched_subject && *a.matched_subject == a.true_subject)) {
        ++c.genuine_recognized;
      }
    } else {
      ++c.impostor_total;
      if (a.accept) ++c.impostor_accepted;
    }
  }
  return report_from_counts(c, protocol);
}

std::vector<EvaluationReport> sweep(std::span<const double> genuine_scores,
                                    std::span<const double> impostor_scores,
                                    std::span<const double> thresholds) {
  if (genuine_scores.empty() || impostor_scores.empty()) throw Error("sweep: empty score list");
  check_thresholds(thresholds);
  std::vector<double> genuine(genuine_scores.begin(), genuine_scores.end());
  std::vector<double> impostor(impostor_scores.begin(), impostor_scores.end());
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<EvaluationReport> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    Counts c;
    c.genuine_total = genuine.size();
    c.genuine_accepted = count_at_most(genuine, t);
    c.genuine_recognized = c.genuine_accepted;
    c.impostor_total = impostor.size();
    c.impostor_accepted = count_at_most(impostor, t);
    EvaluationReport r = report_from_counts(c, Protocol::Verification);
    r.threshold = t;
    out.push_back(r);
  }
  return out;
}

std::vector<EvaluationReport> sweep_attempts(std::span<const ScoredAttempt> attempts,
                                             std::span<const double> thresholds,
                                             Protocol protocol) {
  if (attempts.empty()) throw Error("sweep: no attempts");
  check_thresholds(thresholds);
  std::vector<double> genuine, recognizable, impostor;
  for (const ScoredAttempt& a : attempts) {
    if (a.genuine()) {
      genuine.push_back(a.score);
      if (protocol == Protocol::Verification ||
          (a.rank1_subject && *a.rank1_subject == a.true_subject)) {
        recognizable.push_back(a.score);
      }
    } else {
      impostor.push_back(a.score);
    }
  }
  std::sort(genuine.begin(), genuine.end());
  std::sort(recognizable.begin(), recognizable.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<EvaluationReport> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    Counts c;
    c.genuine_total = genuine.size();
    c.genuine_accepted = count_at_most(genuine, t);
    c.genuine_recognized = count_at_most(recognizable, t);
    c.impostor_total = impostor.size();
    c.impostor_accepted = count_at_most(impostor, t);
    EvaluationReport r = report_from_counts(c, protocol);
    r.threshold = t;
    out.push_back(r);
  }
  return out;
}

std::vector<double> candidate_thresholds(std::span<const double> scores) {
  std::vector<double> out{0.0};
  for (double s : scores) {
    if (std::isfinite(s) && s > 0.0) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EvaluationReport best_threshold(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw Error("best_threshold: no reports");
  const EvaluationReport* best = &reports.front();
  for (const EvaluationReport& r : reports) {
    if (r.recognition_rate > best->recognition_rate) {
      best = &r;
    } else if (r.recognition_rate == best->recognition_rate && r.threshold && best->threshold &&
               *r.threshold < *best->threshold) {
      best = &r;
    }
  }
  return *best;
}

void write_sweep_csv(std::ostream& out, std::span<const EvaluationReport> reports) {
  out << "threshold,far,frr,recognition_rate\n";
  for (const EvaluationReport& r : reports) {
    out << (r.threshold ? shortest(*r.threshold) : std::string("nan")) << ','
        << shortest(r.far) << ',' << shortest(r.frr) << ',' << shortest(r.recognition_rate)
        << '\n';
  }
}

std::string format_percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f %%", rate * 100.0);
  return buf;
}

std::string format_table(const EvaluationReport& face, const EvaluationReport& ear,
                         const EvaluationReport& fused) {
  std::ostringstream out;
  auto row = [&](const std::string& label, double a, double b, double c) {
    out << std::left << std::setw(18) << label << std::setw(10) << format_percent(a)
        << std::setw(10) << format_percent(b) << format_percent(c) << '\n';
  };
  out << std::left << std::setw(18) << "" << std::setw(10) << "Face" << std::setw(10) << "Ear"
      << "Multimodal Fusion" << '\n';
  row("Recognition Rate", face.recognition_rate, ear.recognition_rate, fused.recognition_rate);
  row("FAR", face.far, ear.far, fused.far);
  row("FRR", face.frr, ear.frr, fused.frr);
  return out.str();
}

}  // namespace mbio
