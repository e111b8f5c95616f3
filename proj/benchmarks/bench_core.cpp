#include <random>

#include <benchmark/benchmark.h>

#include "mbio/eigenspace.hpp"
#include "mbio/evaluation.hpp"
#include "mbio/matching.hpp"

namespace {

std::vector<mbio::ImageSample> gallery(int count, int width, int height) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<mbio::ImageSample> out;
  for (int i = 0; i < count; ++i) {
    mbio::Image img(width, height);
    for (double& v : img.pixels()) v = dist(rng);
    out.emplace_back(std::move(img), mbio::Modality::Face, "s" + std::to_string(i % 10));
  }
  return out;
}

// Gram path: far fewer images than pixels.
void BM_TrainGram(benchmark::State& state) {
  const auto g = gallery(static_cast<int>(state.range(0)), 50, 60);
  for (auto _ : state) benchmark::DoNotOptimize(mbio::train(g, g.size()));
}
BENCHMARK(BM_TrainGram)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

// Covariance path: more images than pixels.
void BM_TrainCovariance(benchmark::State& state) {
  const auto g = gallery(200, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mbio::train(g, 20));
}
BENCHMARK(BM_TrainCovariance)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Project(benchmark::State& state) {
  const auto g = gallery(40, 100, 150);
  const auto model = mbio::train(g, 39);
  for (auto _ : state) benchmark::DoNotOptimize(mbio::project(model, g[0]));
}
BENCHMARK(BM_Project);

void BM_Identify(benchmark::State& state) {
  const auto g = gallery(static_cast<int>(state.range(0)), 20, 20);
  const auto model = mbio::train(g, 30);
  std::vector<mbio::FeatureVector> templates;
  for (const auto& s : g) templates.push_back(mbio::project(model, s));
  const auto probe = templates.front();
  const mbio::DecisionPolicy policy(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mbio::identify(templates, probe, policy));
}
BENCHMARK(BM_Identify)->Arg(50)->Arg(400);

void BM_Sweep(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> genuine(static_cast<std::size_t>(state.range(0)));
  std::vector<double> impostor(genuine.size() * 10);
  for (double& v : genuine) v = dist(rng);
  for (double& v : impostor) v = dist(rng);
  std::vector<double> all = genuine;
  all.insert(all.end(), impostor.begin(), impostor.end());
  const auto thresholds = mbio::candidate_thresholds(all);
  for (auto _ : state) benchmark::DoNotOptimize(mbio::sweep(genuine, impostor, thresholds));
}
BENCHMARK(BM_Sweep)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
