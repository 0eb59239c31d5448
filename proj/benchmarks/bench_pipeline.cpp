#include <benchmark/benchmark.h>

#include "ofter/datagen.hpp"
#include "ofter/embed.hpp"
#include "ofter/error.hpp"
#include "ofter/pipeline.hpp"

namespace {

ofter::pipeline::Aligned m3_target(Eigen::Index t_len) {
  ofter::datagen::SyntheticSpec spec;
  spec.model = ofter::datagen::Model::M3;
  spec.t_len = t_len;
  spec.seed = 1;
  return ofter::pipeline::align_one_step(ofter::datagen::generate(spec), "y4", 3);
}

void BM_OnlineEmbeddingUpdate(benchmark::State& state) {
  const auto a = m3_target(3000);
  const auto st = ofter::embed::fit_pca(a.X.topRows(2000), Eigen::VectorXd::Ones(a.X.cols()), 0.9);
  Eigen::Index i = 2000;
  auto e = st;
  for (auto _ : state) {
    e = ofter::embed::online_update(std::move(e), a.X.row(i).transpose());
    if (++i == a.X.rows()) {
      i = 2000;
      e = st;
    }
  }
}

void BM_PipelineStep(benchmark::State& state) {
  ofter::set_warning_sink([](std::string_view, std::string_view) {});
  const auto a = m3_target(3000);
  ofter::pipeline::OfterConfig config;
  ofter::pipeline::apply_variant(config, state.range(0) ? "dr-ft" : "plain");
  const auto initial = ofter::pipeline::initialize(a.X, a.y, config);
  auto s = initial;
  for (auto _ : state) {
    if (s.t >= a.X.rows()) {
      state.PauseTiming();
      s = initial;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(ofter::pipeline::advance(s, a.X, {false, s.t + 1}));
  }
}

void BM_PipelineRun(benchmark::State& state) {
  ofter::set_warning_sink([](std::string_view, std::string_view) {});
  const auto a = m3_target(3000);
  ofter::pipeline::OfterConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(ofter::pipeline::run(a.X, a.y, config));
}

}  // namespace

BENCHMARK(BM_OnlineEmbeddingUpdate);
BENCHMARK(BM_PipelineStep)->Arg(0)->Arg(1)->ArgNames({"dr_ft"});
BENCHMARK(BM_PipelineRun)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
