#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "strobo/kernels.hpp"
#include "strobo/log.hpp"

using namespace strobo;

namespace {

RMatrix candidate_table(int rows, int cols) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  return m;
}

HermitianOperator random_h(int d) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  CMatrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = Complex(n(rng), n(rng));
  return HermitianOperator((a + a.adjoint()) / 2.0);
}

StateVector basis_state(int d, int j) {
  CVector v = CVector::Zero(d);
  v(j) = 1.0;
  return make_state(v);
}

template <auto Fn>
void BM_BestRows(benchmark::State& state) {
  const auto m = candidate_table(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(m, 3));
}

template <auto Fn>
void BM_DiscrepancyProfile(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto h = random_h(d);
  const auto psi = basis_state(d, 0);
  const Projector m{basis_state(d, d - 1), "m"};
  std::vector<double> times;
  for (int g = 0; g < 512; ++g) times.push_back(0.02 * g);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(h, psi, m, times));
}

template <auto Fn>
void BM_NoiseReplicas(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Fn(0.37, 1000000, 9, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_BestRows<kernels::best_rows_serial>)->Name("best_rows/serial")->Arg(40)->Arg(80);
BENCHMARK(BM_BestRows<kernels::best_rows_parallel>)->Name("best_rows/parallel")->Arg(40)->Arg(80);
BENCHMARK(BM_DiscrepancyProfile<kernels::discrepancy_profile_serial>)->Name("discrepancy_profile/serial")->Arg(2)->Arg(8);
BENCHMARK(BM_DiscrepancyProfile<kernels::discrepancy_profile_parallel>)->Name("discrepancy_profile/parallel")->Arg(2)->Arg(8);
BENCHMARK(BM_NoiseReplicas<kernels::noise_replicas_serial>)->Name("noise_replicas/serial")->Arg(1000);
BENCHMARK(BM_NoiseReplicas<kernels::noise_replicas_parallel>)->Name("noise_replicas/parallel")->Arg(1000);

int main(int argc, char** argv) {
  strobo::log().set_level(spdlog::level::err);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
