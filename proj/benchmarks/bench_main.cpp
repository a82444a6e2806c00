#include <benchmark/benchmark.h>

#include <random>

#include "shipbow/codebook.hpp"
#include "shipbow/descriptors.hpp"
#include "shipbow/dog.hpp"
#include "shipbow/selection.hpp"
#include "shipbow/svm.hpp"
#include "shipbow/synthetic.hpp"

using namespace shipbow;

namespace {

const RgbImage& ship() {
  static const RgbImage img = draw_synthetic_ship("container", 1);
  return img;
}

void BM_DetectKeypoints(benchmark::State& state) {
  const GrayImage gray = to_grayscale(ship());
  for (auto _ : state) benchmark::DoNotOptimize(detect_keypoints(gray, ScaleSpaceParams{}));
}
BENCHMARK(BM_DetectKeypoints)->Unit(benchmark::kMillisecond);

void BM_GreedySelect(benchmark::State& state) {
  const GrayImage gray = to_grayscale(ship());
  const auto keypoints = detect_keypoints(gray, ScaleSpaceParams{});
  const auto ordered = score_and_sort(gradient_magnitude(gray), keypoints, 3);
  SelectionParams params;
  params.top_n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(greedy_select(ordered, params));
  state.counters["candidates"] = static_cast<double>(ordered.size());
}
BENCHMARK(BM_GreedySelect)->Arg(100)->Arg(150);

void BM_HandcraftedDescribe(benchmark::State& state) {
  const HandcraftedProvider provider;
  const int side = static_cast<int>(state.range(0));
  const Patch patch = extract_patch(ship(), {128, 88}, side);
  for (auto _ : state) benchmark::DoNotOptimize(provider.describe(patch));
}
BENCHMARK(BM_HandcraftedDescribe)->Arg(64)->Arg(128);

std::vector<Descriptor> random_descriptors(std::size_t n, std::size_t dim) {
  std::mt19937 gen(1);
  std::normal_distribution<double> g;
  std::vector<Descriptor> out(n, Descriptor(dim));
  for (auto& d : out)
    for (auto& v : d) v = g(gen);
  return out;
}

void BM_Kmeans(benchmark::State& state) {
  const auto data = random_descriptors(static_cast<std::size_t>(state.range(0)), 128);
  KmeansOptions opt;
  opt.k = 50;
  opt.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit(data, opt));
}
BENCHMARK(BM_Kmeans)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SmoTrain(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> x(n, std::vector<double>(50));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (auto& v : x[i]) s += v = u(gen);
    y[i] = s > 25.0 ? 1 : -1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(train_binary(x, y, SvmParams{}));
}
BENCHMARK(BM_SmoTrain)->Arg(120)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
