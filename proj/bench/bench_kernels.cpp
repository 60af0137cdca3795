// Serial reference against OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "fcm/assembly.hpp"
#include "fcm/experiments.hpp"
#include "fcm/sparse.hpp"

using namespace fcm;

namespace {

geometry::Execution exec_of(const benchmark::State& st) {
  return st.range(0) ? geometry::Execution::parallel : geometry::Execution::serial;
}

// p=2 rotating-square system at h = 1/32, built once
const experiments::SquareCase& square_case() {
  static const experiments::SquareCase c = [] {
    experiments::ScenarioConfig cfg;
    return experiments::build_square_case(cfg, 0.3);
  }();
  return c;
}

void BM_spmv(benchmark::State& st) {
  const auto& A = square_case().system.matrix();
  const sparse::Vector x = sparse::Vector::LinSpaced(A.rows(), -1.0, 1.0);
  sparse::Vector y(A.rows());
  for (auto _ : st) {
    sparse::spmv(A, x.data(), y.data(), exec_of(st));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * A.nonZeros());
}

void BM_dot(benchmark::State& st) {
  const sparse::Vector a = sparse::Vector::LinSpaced(1 << 20, -1.0, 1.0);
  const sparse::Vector b = sparse::Vector::LinSpaced(1 << 20, 2.0, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(sparse::dot(a, b, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * a.size());
}

void BM_tessellate(benchmark::State& st) {
  const auto domain = experiments::rotating_square_domain(0.3, 1.0 / 32.0, 5e-3);
  const auto mesh = geometry::CartesianMesh::covering(domain.bounds(), 1.0 / 32.0);
  for (auto _ : st) {
    auto cells = geometry::tessellate(domain, mesh, {2, 3, exec_of(st)});
    benchmark::DoNotOptimize(cells.data());
  }
}

void BM_assemble(benchmark::State& st) {
  const auto& c = square_case();
  assembly::AssemblyOptions opt;
  opt.execution = exec_of(st);
  for (auto _ : st) {
    auto sys = assembly::assemble_poisson(c.cells, c.space, c.problem, opt);
    benchmark::DoNotOptimize(sys.b.data());
  }
}

}  // namespace

BENCHMARK(BM_spmv)->Arg(0)->Arg(1);
BENCHMARK(BM_dot)->Arg(0)->Arg(1);
BENCHMARK(BM_tessellate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
