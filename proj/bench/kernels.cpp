// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "stmeta/fem.hpp"
#include "stmeta/tensor.hpp"

using namespace stm;

namespace {

const SimplexMesh& mesh_for(int n) {
  static std::map<int, SimplexMesh> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_space_time_mesh(2, n, n, true)).first;
  return it->second;
}

const std::vector<SpaceTimeFn>& velocity() {
  static const std::vector<SpaceTimeFn> v = {[](const Point& p) { return 0.3 + 0.1 * std::sin(6.0 * p[1]); },
                                             [](const Point& p) { return 0.2 * p[2]; }};
  return v;
}

std::vector<double> random_vector(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = uni(rng);
  return x;
}

void BM_multiply(benchmark::State& state, bool parallel) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  const auto a = assemble_lsq_advection(mesh, interpolate_velocity(mesh, velocity()));
  const auto x = random_vector(a.n);
  std::vector<double> y(a.n);
  for (auto _ : state) {
    if (parallel) multiply(a, x, y);
    else multiply_serial(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * a.nnz()));
}

void BM_dot(benchmark::State& state, bool parallel) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parallel ? dot(x, x) : dot_serial(x, x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * x.size()));
}

void BM_assemble_p1(benchmark::State& state, bool parallel) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  const auto u = interpolate_velocity(mesh, velocity());
  for (auto _ : state) {
    auto a = parallel ? assemble_lsq_advection(mesh, u) : assemble_lsq_advection_serial(mesh, u);
    benchmark::DoNotOptimize(a.values.data());
  }
}

void BM_assemble_q1(benchmark::State& state, bool parallel) {
  const auto& mesh = mesh_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto a = parallel ? assemble_lsq_advection_q1(mesh, velocity()) : assemble_lsq_advection_q1_serial(mesh, velocity());
    benchmark::DoNotOptimize(a.values.data());
  }
}

} // namespace

BENCHMARK_CAPTURE(BM_multiply, serial, false)->Arg(16)->Arg(32);
BENCHMARK_CAPTURE(BM_multiply, openmp, true)->Arg(16)->Arg(32);
BENCHMARK_CAPTURE(BM_dot, serial, false)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_dot, openmp, true)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_assemble_p1, serial, false)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_assemble_p1, openmp, true)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_assemble_q1, serial, false)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_assemble_q1, openmp, true)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
