#include <benchmark/benchmark.h>

#include <random>

#include "macl/macl.hpp"

namespace {

struct Fixture {
  Eigen::MatrixXd z;
  std::vector<macl::LabelSet> labels;
  macl::CorpusLabelStats stats;
};

Fixture make_fixture(std::size_t batch, std::size_t dim, std::size_t num_labels) {
  std::mt19937_64 rng(batch * 31 + dim);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::uint64_t> bits(1, (std::uint64_t{1} << num_labels) - 1);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = g(rng);
  z.rowwise().normalize();
  std::vector<macl::LabelSet> labels(batch), corpus(2000);
  for (auto& y : labels) y = macl::LabelSet::from_bits(bits(rng));
  for (auto& y : corpus) y = macl::LabelSet::from_bits(bits(rng));
  return {std::move(z), std::move(labels), macl::CorpusLabelStats::build(corpus)};
}

void BM_BatchLoss(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 64, 17);
  const macl::BatchView batch(f.z, f.labels);
  macl::batch_loss(batch, &f.stats, {});  // fill the co-occurrence memo
  for (auto _ : state) benchmark::DoNotOptimize(macl::batch_loss(batch, &f.stats, {}).total);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BatchLoss)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_BatchLossGradient(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 64, 17);
  const macl::BatchView batch(f.z, f.labels);
  macl::batch_loss(batch, &f.stats, {});
  for (auto _ : state) benchmark::DoNotOptimize(macl::batch_loss_gradient(batch, &f.stats, {}).embeddings.data());
}
BENCHMARK(BM_BatchLossGradient)->RangeMultiplier(2)->Range(16, 256);

void BM_AnchorGradient(benchmark::State& state) {
  const auto f = make_fixture(128, 64, 17);
  const macl::BatchView batch(f.z, f.labels);
  macl::batch_loss(batch, &f.stats, {});
  for (auto _ : state) benchmark::DoNotOptimize(macl::analytic_gradient(batch, &f.stats, {}, 0).total.data());
}
BENCHMARK(BM_AnchorGradient);

void BM_ContainmentCount(benchmark::State& state) {
  const auto f = make_fixture(128, 8, 17);
  const bool warm = state.range(0) != 0;
  std::mt19937_64 rng(5);
  std::vector<macl::LabelSet> keys(1024);
  for (auto& k : keys) k = macl::LabelSet::from_bits(rng() & ((1u << 17) - 1) | 1u);
  if (warm) {
    for (auto k : keys) f.stats.containment_count(k);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    if (!warm) {
      state.PauseTiming();
      auto cold = macl::CorpusLabelStats::build(std::vector<macl::LabelSet>(f.labels));
      state.ResumeTiming();
      benchmark::DoNotOptimize(cold.containment_count(keys[i++ % keys.size()]));
    } else {
      benchmark::DoNotOptimize(f.stats.containment_count(keys[i++ % keys.size()]));
    }
  }
}
BENCHMARK(BM_ContainmentCount)->Arg(0)->Arg(1);

void BM_EvaluateLeaveOneOut(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 32, 17);
  for (auto _ : state) benchmark::DoNotOptimize(macl::evaluate_leave_one_out(f.z, f.labels).wap_at_k);
}
BENCHMARK(BM_EvaluateLeaveOneOut)->Arg(100)->Arg(420);

}  // namespace
BENCHMARK_MAIN();
