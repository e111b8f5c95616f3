#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mbio/eigenspace.hpp"
#include "mbio/evaluation.hpp"
#include "mbio/experiment.hpp"
#include "mbio/fusion.hpp"
#include "mbio/gallery.hpp"
#include "mbio/matching.hpp"
#include "mbio/quality.hpp"
#include "run_config.hpp"

namespace mbio::cli {
namespace fs = std::filesystem;
namespace {

enum class Flag {
  Dataset, FaceModel, EarModel, Store, Out, FaceThreshold, EarThreshold, MinNcc, Samples,
  Majority, Split, Seed, FaceSize, EarSize, Components, Variance, Protocol, Workers,
};

struct FlagValues {
  std::string config, dataset, face_model, ear_model, store, out, split, face_size, ear_size,
      protocol;
  double face_threshold = 0, ear_threshold = 0, min_ncc = 0, variance = 0;
  int samples = 0, majority = 0;
  std::uint64_t seed = 0;
  std::size_t components = 0;
  unsigned workers = 0;

  // Command-specific.
  std::string claim, subject, scores, thresholds;
  std::vector<std::string> face_paths, ear_paths;
};

void add_flags(CLI::App* app, FlagValues& v, std::initializer_list<Flag> flags) {
  app->add_option("--config", v.config, "JSON config file; flags override its values");
  for (Flag flag : flags) {
    switch (flag) {
      case Flag::Dataset: app->add_option("--dataset", v.dataset, "Dataset root"); break;
      case Flag::FaceModel: app->add_option("--face-model", v.face_model, "Face model file"); break;
      case Flag::EarModel: app->add_option("--ear-model", v.ear_model, "Ear model file"); break;
      case Flag::Store: app->add_option("--store", v.store, "Enrollment store file"); break;
      case Flag::Out: app->add_option("--out", v.out, "Output path"); break;
      case Flag::FaceThreshold:
        app->add_option("--face-threshold", v.face_threshold, "Face distance threshold");
        break;
      case Flag::EarThreshold:
        app->add_option("--ear-threshold", v.ear_threshold, "Ear distance threshold");
        break;
      case Flag::MinNcc:
        app->add_option("--min-ncc", v.min_ncc, "Quality gate; 0 disables it");
        break;
      case Flag::Samples:
        app->add_option("--samples", v.samples, "Samples per modality (default 3)");
        break;
      case Flag::Majority:
        app->add_option("--majority", v.majority, "Accept votes needed (default 2)");
        break;
      case Flag::Split: app->add_option("--split", v.split, "TRAIN:PROBE files per subject"); break;
      case Flag::Seed: app->add_option("--seed", v.seed, "Shuffle files before splitting"); break;
      case Flag::FaceSize: app->add_option("--face-size", v.face_size, "Face WxH (150x200)"); break;
      case Flag::EarSize: app->add_option("--ear-size", v.ear_size, "Ear WxH (100x150)"); break;
      case Flag::Components:
        app->add_option("--components", v.components, "Cap on retained components");
        break;
      case Flag::Variance:
        app->add_option("--variance", v.variance, "Cumulative variance to retain (0.95)");
        break;
      case Flag::Protocol:
        app->add_option("--protocol", v.protocol, "identification or verification");
        break;
      case Flag::Workers: app->add_option("--workers", v.workers, "Scoring threads"); break;
    }
  }
}

RunConfig merge(const CLI::App& app, const FlagValues& v) {
  RunConfig cfg = v.config.empty() ? RunConfig{} : load_config(v.config);
  auto given = [&](const char* name) {
    try {
      return app.count(name) > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  if (given("--dataset")) cfg.dataset = v.dataset;
  if (given("--face-model")) cfg.face_model = v.face_model;
  if (given("--ear-model")) cfg.ear_model = v.ear_model;
  if (given("--store")) cfg.store = v.store;
  if (given("--out")) cfg.out = v.out;
  if (given("--face-threshold")) cfg.face_threshold = v.face_threshold;
  if (given("--ear-threshold")) cfg.ear_threshold = v.ear_threshold;
  if (given("--min-ncc")) cfg.min_ncc = v.min_ncc;
  if (given("--samples")) cfg.samples_per_modality = v.samples;
  if (given("--majority")) cfg.majority_min = v.majority;
  if (given("--split")) cfg.split = parse_split(v.split);
  if (given("--seed")) cfg.seed = v.seed;
  if (given("--face-size")) cfg.face_size = parse_image_size(v.face_size);
  if (given("--ear-size")) cfg.ear_size = parse_image_size(v.ear_size);
  if (given("--components")) cfg.components = v.components;
  if (given("--variance")) cfg.variance_fraction = v.variance;
  if (given("--protocol")) cfg.protocol = parse_protocol(v.protocol);
  if (given("--workers")) cfg.workers = v.workers;
  cfg.validate();
  return cfg;
}

const fs::path& require_file(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw Error(std::string("missing ") + flag);
  std::error_code ec;
  if (!fs::exists(*p, ec)) throw Error(std::string(flag) + " '" + p->string() + "' not found");
  return *p;
}

const fs::path& require_path(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw Error(std::string("missing ") + flag);
  return *p;
}

double require_value(const std::optional<double>& v, const char* flag) {
  if (!v) throw Error(std::string("missing ") + flag);
  return *v;
}

std::string fixed6(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Models {
  EigenModel face;
  EigenModel ear;
};

Models load_models(const RunConfig& cfg) {
  Models m{load_model(require_file(cfg.face_model, "--face-model")),
           load_model(require_file(cfg.ear_model, "--ear-model"))};
  if (m.face.modality() != Modality::Face) throw Error("--face-model is not a face model");
  if (m.ear.modality() != Modality::Ear) throw Error("--ear-model is not an ear model");
  return m;
}

ImageSize model_size(const EigenModel& model) {
  return ImageSize{model.image_width(), model.image_height()};
}

DatasetManifest scan_nonempty(const RunConfig& cfg, ImageSize face, ImageSize ear) {
  DatasetManifest manifest = scan_dataset(require_file(cfg.dataset, "--dataset"));
  if (manifest.subjects.empty()) throw Error("no subjects in dataset");
  manifest.face_size = face;
  manifest.ear_size = ear;
  return manifest;
}

// train -------------------------------------------------------------------

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const fs::path& face_out = require_path(cfg.face_model, "--face-model");
  const fs::path& ear_out = require_path(cfg.ear_model, "--ear-model");
  const DatasetManifest manifest = scan_nonempty(cfg, cfg.face_size, cfg.ear_size);
  const auto parts = partition(manifest, SplitOptions{cfg.split, cfg.seed});

  for (Modality m : {Modality::Face, Modality::Ear}) {
    const auto gallery = training_gallery(manifest, parts, m);
    const TrainResult result =
        train_with_report(gallery, TrainOptions{cfg.components, cfg.variance_fraction});
    save_model(m == Modality::Face ? face_out : ear_out, result.model);
    out << to_string(m) << ": images=" << gallery.size() << " size="
        << result.model.image_width() << 'x' << result.model.image_height()
        << " rank=" << result.rank << " k=" << result.model.k()
        << " retained_variance=" << format_percent(result.retained_fraction()) << '\n';
  }
  return kOk;
}

// enroll ------------------------------------------------------------------

int cmd_enroll(const RunConfig& cfg, const std::string& only_subject, std::ostream& out) {
  const Models models = load_models(cfg);
  const fs::path& store_path = require_path(cfg.store, "--store");
  const DatasetManifest manifest =
      scan_nonempty(cfg, model_size(models.face), model_size(models.ear));
  const auto parts = partition(manifest, SplitOptions{cfg.split, cfg.seed});

  EnrollmentStore store;
  std::size_t enrolled = 0;
  for (const PartitionedSubject& part : parts) {
    if (!only_subject.empty() && part.subject_id != only_subject) continue;
    for (Modality m : {Modality::Face, Modality::Ear}) {
      const EigenModel& model = m == Modality::Face ? models.face : models.ear;
      const auto samples =
          load_samples(part.train(m), manifest.size(m), m, part.subject_id);
      if (samples.empty()) throw Error("subject '" + part.subject_id + "' has no training samples");
      store.enroll(model, samples, part.subject_id);
    }
    ++enrolled;
  }
  if (enrolled == 0) throw Error("no subjects enrolled");
  store.set_created_at(utc_timestamp());
  save_store(store_path, store);
  out << "enrolled " << enrolled << " subjects: " << store.templates(Modality::Face).size()
      << " face templates, " << store.templates(Modality::Ear).size() << " ear templates\n";
  return kOk;
}

// verify / identify -------------------------------------------------------

struct ProbeContext {
  Models models;
  EnrollmentStore store;
  FusionPolicy fusion;
};

ProbeContext load_probe_context(const RunConfig& cfg, const FlagValues& v) {
  Models models = load_models(cfg);
  EnrollmentStore store =
      load_store(require_file(cfg.store, "--store"), &models.face, &models.ear);
  const FusionPolicy fusion = cfg.fusion();
  for (const auto* paths : {&v.face_paths, &v.ear_paths}) {
    if (static_cast<int>(paths->size()) != fusion.samples_per_modality()) {
      throw Error("expected " + std::to_string(fusion.samples_per_modality()) + " " +
                  (paths == &v.face_paths ? "face" : "ear") + " images, got " +
                  std::to_string(paths->size()));
    }
  }
  return ProbeContext{std::move(models), std::move(store), fusion};
}

struct GatedProbe {
  QualityScore quality;
  std::optional<FeatureVector> features;  // absent when gated out
};

std::vector<GatedProbe> gate_probes(const EigenModel& model, const std::vector<std::string>& paths,
                                    double min_ncc) {
  const QualityPolicy policy(min_ncc, model.mean_image());
  std::vector<GatedProbe> out;
  for (const std::string& p : paths) {
    const ImageSample sample =
        load_image(p, model.image_width(), model.image_height(), model.modality());
    GatedProbe probe{assess(policy, sample), std::nullopt};
    if (probe.quality.passed) probe.features = project(model, sample);
    out.push_back(std::move(probe));
  }
  return out;
}

std::string vote_line(Modality m, std::size_t index, const QualityScore& q, const Decision& d) {
  std::ostringstream line;
  line << to_string(m) << ' ' << index + 1 << " ncc=" << fixed6(q.ncc)
       << " quality=" << (q.passed ? "pass" : "fail");
  if (d.reason() != DecisionReason::QualityRejected) {
    line << " subject=" << d.score().matched_subject << " distance=" << fixed6(d.score().distance);
  }
  line << " vote=" << (d.accept() ? "accept" : "reject") << " reason=" << to_string(d.reason());
  return line.str();
}

int cmd_verify(const RunConfig& cfg, const FlagValues& v, std::ostream& out) {
  if (v.claim.empty()) throw Error("missing --claim");
  const ProbeContext ctx = load_probe_context(cfg, v);
  for (Modality m : {Modality::Face, Modality::Ear}) {
    if (!ctx.store.has_subject(m, v.claim)) throw Error("unknown subject '" + v.claim + "'");
  }
  const DecisionPolicy face_policy(require_value(cfg.face_threshold, "--face-threshold"));
  const DecisionPolicy ear_policy(require_value(cfg.ear_threshold, "--ear-threshold"));

  out << "claim " << v.claim << '\n';
  std::vector<ModalityVerdict> verdicts;
  for (Modality m : {Modality::Face, Modality::Ear}) {
    const EigenModel& model = m == Modality::Face ? ctx.models.face : ctx.models.ear;
    const DecisionPolicy& policy = m == Modality::Face ? face_policy : ear_policy;
    const auto probes = gate_probes(model, m == Modality::Face ? v.face_paths : v.ear_paths,
                                    cfg.min_ncc);
    std::vector<Decision> votes;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      votes.push_back(probes[i].features
                          ? verify(v.claim, ctx.store.templates(m), *probes[i].features, policy)
                          : Decision::quality_rejected(m));
      out << vote_line(m, i, probes[i].quality, votes.back()) << '\n';
    }
    ModalityVerdict verdict = majority(votes, ctx.fusion);
    out << to_string(m) << " verdict " << (verdict.accept ? "accept" : "reject") << " ("
        << verdict.accept_count() << '/' << votes.size() << " votes, need "
        << ctx.fusion.majority_min() << ")\n";
    verdicts.push_back(std::move(verdict));
  }
  const FusedDecision fused = and_fuse(std::move(verdicts[0]), std::move(verdicts[1]));
  out << "fused " << (fused.accept ? "accept" : "reject") << '\n';
  return fused.accept ? kOk : kReject;
}

int cmd_identify(const RunConfig& cfg, const FlagValues& v, std::ostream& out) {
  const ProbeContext ctx = load_probe_context(cfg, v);
  const DecisionPolicy face_policy(require_value(cfg.face_threshold, "--face-threshold"));
  const DecisionPolicy ear_policy(require_value(cfg.ear_threshold, "--ear-threshold"));

  std::map<Modality, std::optional<std::string>> winners;
  for (Modality m : {Modality::Face, Modality::Ear}) {
    const EigenModel& model = m == Modality::Face ? ctx.models.face : ctx.models.ear;
    const DecisionPolicy& policy = m == Modality::Face ? face_policy : ear_policy;
    const auto probes = gate_probes(model, m == Modality::Face ? v.face_paths : v.ear_paths,
                                    cfg.min_ncc);
    std::map<std::string, int> tally;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const Decision d = probes[i].features
                             ? identify(ctx.store.templates(m), *probes[i].features, policy)
                             : Decision::quality_rejected(m);
      if (d.accept()) ++tally[d.score().matched_subject];
      out << vote_line(m, i, probes[i].quality, d) << '\n';
    }
    // Most votes wins; std::map order breaks ties lexicographically.
    std::optional<std::string> winner;
    int best = 0;
    for (const auto& [subject, count] : tally) {
      if (count > best) {
        best = count;
        winner = subject;
      }
    }
    if (best < ctx.fusion.majority_min()) winner.reset();
    out << to_string(m) << " verdict " << (winner ? *winner : std::string("none")) << " ("
        << best << '/' << probes.size() << " votes, need " << ctx.fusion.majority_min() << ")\n";
    winners[m] = winner;
  }
  const auto& face = winners[Modality::Face];
  const auto& ear = winners[Modality::Ear];
  if (face && ear && *face == *ear) {
    out << "identified " << *face << '\n';
    return kOk;
  }
  out << "fused reject\n";
  return kReject;
}

// evaluate ----------------------------------------------------------------

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const Models models = load_models(cfg);
  const EnrollmentStore store =
      load_store(require_file(cfg.store, "--store"), &models.face, &models.ear);
  const fs::path& out_dir = require_path(cfg.out, "--out");
  if (!cfg.split) throw Error("evaluate needs --split TRAIN:PROBE");
  const DatasetManifest manifest =
      scan_nonempty(cfg, model_size(models.face), model_size(models.ear));
  const auto parts = partition(manifest, SplitOptions{cfg.split, cfg.seed});
  const auto attempts = build_probe_attempts(manifest, parts, cfg.samples_per_modality);
  if (attempts.empty()) {
    throw Error("insufficient probes: each subject needs at least " +
                std::to_string(cfg.samples_per_modality) + " probe images per modality");
  }

  const ExperimentConfig config{cfg.fusion(), cfg.min_ncc, cfg.protocol, cfg.workers};
  const ExperimentResult result = run_experiment(models.face, models.ear, store, attempts, config);

  fs::create_directories(out_dir);
  for (Modality m : {Modality::Face, Modality::Ear}) {
    std::ostringstream csv;
    write_sweep_csv(csv, m == Modality::Face ? result.face_sweep : result.ear_sweep);
    write_text_file(out_dir / (std::string(to_string(m)) + "_sweep.csv"), csv.str());
  }
  write_text_file(out_dir / "report.json",
                  experiment_to_json(result, config, cfg.split, cfg.seed));
  const std::string table = format_table(result.face, result.ear, result.fused);
  write_text_file(out_dir / "table.txt", table);

  out << "protocol " << to_string(cfg.protocol) << ", split " << to_string(*cfg.split)
      << ", " << attempts.size() << " attempts x " << result.claims.size() << " claims\n";
  out << "face threshold " << fixed6(*result.face.threshold) << ", ear threshold "
      << fixed6(*result.ear.threshold) << '\n';
  out << table;
  return kOk;
}

// sweep -------------------------------------------------------------------

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error("invalid number '" + item + "'");
    out.push_back(value);
  }
  return out;
}

int cmd_sweep(const RunConfig& cfg, const FlagValues& v, std::ostream& out, std::ostream& err) {
  if (v.scores.empty()) throw Error("missing --scores");
  std::ifstream in(v.scores);
  if (!in) throw Error("cannot open scores file '" + v.scores + "'");
  std::vector<double> genuine, impostor;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "kind,score") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error("scores line " + std::to_string(line_no) + ": expected kind,score");
    const std::string kind = line.substr(0, comma);
    const double score = parse_number_list(line.substr(comma + 1)).at(0);
    if (kind == "genuine") {
      genuine.push_back(score);
    } else if (kind == "impostor") {
      impostor.push_back(score);
    } else {
      throw Error("scores line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
  }
  std::vector<double> thresholds;
  if (v.thresholds.empty()) {
    std::vector<double> all = genuine;
    all.insert(all.end(), impostor.begin(), impostor.end());
    thresholds = candidate_thresholds(all);
  } else {
    thresholds = parse_number_list(v.thresholds);
  }
  const auto reports = sweep(genuine, impostor, thresholds);
  std::ostringstream csv;
  write_sweep_csv(csv, reports);
  if (cfg.out) {
    write_text_file(*cfg.out, csv.str());
  } else {
    out << csv.str();
  }
  const EvaluationReport best = best_threshold(reports);
  (cfg.out ? out : err) << "best threshold " << *best.threshold << ": recognition "
                              << format_percent(best.recognition_rate) << ", FAR "
                              << format_percent(best.far) << ", FRR " << format_percent(best.frr)
                              << '\n';
  return kOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mbio: face and ear recognition with decision-level fusion"};
  app.require_subcommand(1);
  FlagValues v;

  using F = Flag;
  auto* train = app.add_subcommand("train", "Train face and ear eigenspace models");
  add_flags(train, v, {F::Dataset, F::FaceModel, F::EarModel, F::Split, F::Seed, F::FaceSize,
                       F::EarSize, F::Components, F::Variance});

  auto* enroll = app.add_subcommand("enroll", "Project training images into an enrollment store");
  add_flags(enroll, v, {F::Dataset, F::FaceModel, F::EarModel, F::Store, F::Split, F::Seed});
  enroll->add_option("--subject", v.subject, "Enroll only this subject");

  const std::initializer_list<Flag> probe_flags{F::FaceModel, F::EarModel, F::Store,
                                                F::FaceThreshold, F::EarThreshold, F::MinNcc,
                                                F::Samples, F::Majority};
  auto* verify_cmd = app.add_subcommand("verify", "Verify a claimed identity (exit 0 accept, 1 reject)");
  add_flags(verify_cmd, v, probe_flags);
  verify_cmd->add_option("--claim", v.claim, "Claimed subject label");
  verify_cmd->add_option("--face", v.face_paths, "Face probe images")->expected(1, -1);
  verify_cmd->add_option("--ear", v.ear_paths, "Ear probe images")->expected(1, -1);

  auto* identify_cmd = app.add_subcommand("identify", "Identify probes among enrolled subjects");
  add_flags(identify_cmd, v, probe_flags);
  identify_cmd->add_option("--face", v.face_paths, "Face probe images")->expected(1, -1);
  identify_cmd->add_option("--ear", v.ear_paths, "Ear probe images")->expected(1, -1);

  auto* evaluate = app.add_subcommand("evaluate", "Sweep thresholds and report FAR/FRR/recognition");
  add_flags(evaluate, v, {F::Dataset, F::FaceModel, F::EarModel, F::Store, F::Out, F::MinNcc,
                          F::Samples, F::Majority, F::Split, F::Seed, F::Protocol, F::Workers});

  auto* sweep_cmd = app.add_subcommand("sweep", "FAR/FRR curve from a kind,score CSV");
  add_flags(sweep_cmd, v, {F::Out});
  sweep_cmd->add_option("--scores", v.scores, "CSV with rows genuine|impostor,score");
  sweep_cmd->add_option("--thresholds", v.thresholds, "Comma-separated ascending thresholds");

  std::vector<const char*> argv{"mbio"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = merge(*sub, v);
    if (sub == train) return cmd_train(cfg, out);
    if (sub == enroll) return cmd_enroll(cfg, v.subject, out);
    if (sub == verify_cmd) return cmd_verify(cfg, v, out);
    if (sub == identify_cmd) return cmd_identify(cfg, v, out);
    if (sub == evaluate) return cmd_evaluate(cfg, out);
    return cmd_sweep(cfg, v, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace mbio::cli
