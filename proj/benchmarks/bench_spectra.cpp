#include <benchmark/benchmark.h>

#include <random>

#include "ofter/spectra.hpp"

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = n(gen);
  return 0.5 * (m + m.transpose());
}

Eigen::VectorXd random_vector(Eigen::Index d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = n(gen);
  return v;
}

void BM_RankOneUpdate(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 gen(1);
  const auto sys = ofter::spectra::full_eig(random_symmetric(d, gen));
  const Eigen::VectorXd v = random_vector(d, gen);
  for (auto _ : state) benchmark::DoNotOptimize(ofter::spectra::rank_one_update(sys, {0.3, v}));
}

void BM_FullEig(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd a = random_symmetric(d, gen);
  const Eigen::VectorXd v = random_vector(d, gen);
  for (auto _ : state) benchmark::DoNotOptimize(ofter::spectra::full_eig(a + 0.3 * v * v.transpose()));
}

void BM_SecularRoots(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 gen(2);
  Eigen::VectorXd lam = random_vector(d, gen);
  std::sort(lam.data(), lam.data() + d, std::greater<>());
  Eigen::VectorXd z = random_vector(d, gen);
  z.normalize();
  for (auto _ : state) benchmark::DoNotOptimize(ofter::spectra::secular_roots(lam, z, 0.5));
}

}  // namespace

BENCHMARK(BM_RankOneUpdate)->RangeMultiplier(2)->Range(8, 256);
BENCHMARK(BM_FullEig)->RangeMultiplier(2)->Range(8, 256);
BENCHMARK(BM_SecularRoots)->RangeMultiplier(2)->Range(8, 256);
