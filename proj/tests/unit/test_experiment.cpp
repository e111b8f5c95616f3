#include <doctest.h>

#include <algorithm>
#include <random>

#include "mbio/experiment.hpp"
#include "support.hpp"

using namespace mbio;
using mbio::testing::TempDir;
namespace fs = std::filesystem;

TEST_CASE("split parsing") {
  CHECK(parse_split("4:3") == Split{4, 3});
  CHECK(to_string(Split{4, 3}) == "4:3");
  CHECK_THROWS_AS(parse_split("4"), Error);
  CHECK_THROWS_AS(parse_split("0:3"), Error);
  CHECK_THROWS_AS(parse_split("a:b"), Error);
}

TEST_CASE("partition") {
  TempDir dir("partition");
  mbio::testing::SyntheticOptions opts;
  opts.subjects = 2;
  opts.samples_per_subject = 5;
  mbio::testing::write_synthetic_dataset(dir.path(), opts);
  const DatasetManifest m = scan_dataset(dir.path());

  SUBCASE("in order without a seed") {
    const auto parts = partition(m, SplitOptions{Split{3, 2}, std::nullopt});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].face_train.size() == 3);
    CHECK(parts[0].face_probe.size() == 2);
    CHECK(parts[0].face_train[0].filename() == "01.pgm");
    CHECK(parts[0].face_probe[1].filename() == "05.pgm");
  }
  SUBCASE("seeded shuffle is a reproducible permutation") {
    const auto a = partition(m, SplitOptions{Split{3, 2}, 9});
    const auto b = partition(m, SplitOptions{Split{3, 2}, 9});
    CHECK(a[1].ear_probe == b[1].ear_probe);
    std::vector<fs::path> all = a[0].face_train;
    all.insert(all.end(), a[0].face_probe.begin(), a[0].face_probe.end());
    std::sort(all.begin(), all.end());
    CHECK(all == m.subjects[0].face);
  }
  SUBCASE("no split keeps everything for training") {
    const auto parts = partition(m, SplitOptions{});
    CHECK(parts[0].ear_train.size() == 5);
    CHECK(parts[0].ear_probe.empty());
  }
  SUBCASE("count mismatch") {
    CHECK_THROWS_AS(partition(m, SplitOptions{Split{4, 3}, std::nullopt}), Error);
  }
  SUBCASE("probe grouping drops leftovers") {
    const auto parts = partition(m, SplitOptions{Split{1, 4}, std::nullopt});
    const auto attempts = build_probe_attempts(m, parts, 3);
    CHECK(attempts.size() == 2);
    CHECK(attempts[0].face.size() == 3);
  }
}

TEST_CASE("attempt-level score reproduces the majority verdict") {
  TempDir dir("order");
  mbio::testing::SyntheticOptions opts;
  opts.noise = 40;
  const auto p = mbio::testing::build_pipeline(dir.path(), opts, Split{4, 3});
  ExperimentConfig config;
  config.min_ncc = 0.999;  // gates some samples
  config.protocol = Protocol::Verification;
  const ExperimentResult r = run_experiment(*p.face, *p.ear, p.store, p.attempts, config);

  const std::size_t n = r.claims.size();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const double t = std::uniform_real_distribution<double>(0.0, 400.0)(rng) / 255.0 * 8;
    for (std::size_t i = 0; i < p.attempts.size(); ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        const auto votes = sample_decisions(r.face_scores[i], c, r.claims[c], Modality::Face,
                                            DecisionPolicy(t));
        const bool accept = majority(votes, config.fusion).accept;
        CHECK(accept == (r.face_attempts[i * n + c].score <= t));
      }
    }
  }
}

TEST_CASE("experiment output does not depend on the worker count") {
  TempDir dir("workers");
  mbio::testing::SyntheticOptions opts;
  opts.noise = 30;
  const auto p = mbio::testing::build_pipeline(dir.path(), opts, Split{4, 3});
  ExperimentConfig config;
  std::string reference;
  for (unsigned w : {1u, 2u, 3u, 8u}) {
    config.workers = w;
    const auto r = run_experiment(*p.face, *p.ear, p.store, p.attempts, config);
    const std::string json = experiment_to_json(r, config, Split{4, 3}, std::nullopt);
    if (reference.empty()) reference = json;
    CHECK(json == reference);
  }
}

TEST_CASE("fusion never accepts more impostors than either modality") {
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    TempDir dir("dominate");
    mbio::testing::SyntheticOptions opts;
    opts.seed = seed;
    opts.noise = 25;
    opts.face_clone = std::pair{0, 1};
    const auto p = mbio::testing::build_pipeline(dir.path(), opts, Split{4, 3});
    for (Protocol protocol : {Protocol::Identification, Protocol::Verification}) {
      ExperimentConfig config;
      config.protocol = protocol;
      const auto r = run_experiment(*p.face, *p.ear, p.store, p.attempts, config);
      CHECK(r.fused.counts.impostor_accepted <= r.face.counts.impostor_accepted);
      CHECK(r.fused.counts.impostor_accepted <= r.ear.counts.impostor_accepted);
      CHECK(r.fused.counts.impostor_total == r.face.counts.impostor_total);
      CHECK(r.fused.counts.genuine_total == p.attempts.size());
    }
  }
}

TEST_CASE("well separated subjects are recognized") {
  TempDir dir("separated");
  mbio::testing::SyntheticOptions opts;
  const auto p = mbio::testing::build_pipeline(dir.path(), opts, Split{4, 3});
  const auto r = run_experiment(*p.face, *p.ear, p.store, p.attempts, ExperimentConfig{});
  CHECK(r.fused.recognition_rate == 1.0);
  CHECK(r.fused.far == 0.0);
  CHECK(r.fused.counts.impostor_total == 20);
}

TEST_CASE("experiment errors") {
  TempDir dir("errors");
  const auto p = mbio::testing::build_pipeline(dir.path(), {}, Split{4, 3});
  CHECK_THROWS_WITH(run_experiment(*p.face, *p.ear, p.store, {}, ExperimentConfig{}),
                    doctest::Contains("insufficient probes"));
  CHECK_THROWS_AS(run_experiment(*p.ear, *p.face, p.store, p.attempts, ExperimentConfig{}), Error);
}
