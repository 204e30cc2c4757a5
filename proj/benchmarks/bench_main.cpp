#include <benchmark/benchmark.h>

#include "emi/bem.hpp"
#include "emi/coupling.hpp"
#include "emi/harness.hpp"
#include "emi/integrator.hpp"

using namespace emi;

namespace {

ParamCurve circle(std::size_t M) {
  std::vector<Point> p;
  for (std::size_t j = 0; j < M; ++j) {
    const double a = 2.0 * M_PI * j / M;
    p.emplace_back(2.0 * std::cos(a), std::sin(a));
  }
  return ParamCurve::fourier(p);
}

Scene array(int cols) {
  CellArraySpec spec;
  spec.rows = 2;
  spec.cols = cols;
  return build_cell_array(with_scaled_bath(spec));
}

void BM_LayerAssembly(benchmark::State& state) {
  const auto c = circle(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_self(c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LayerAssembly)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_InteriorMap(benchmark::State& state) {
  const auto c = circle(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(interior_dtn(c));
}
BENCHMARK(BM_InteriorMap)->RangeMultiplier(2)->Range(64, 512);

void BM_CoupledSetup(benchmark::State& state) {
  const auto s = array(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_coupled(s, 690.0, 1e4));
  state.counters["nodes"] = static_cast<double>(s.num_nodes());
}
BENCHMARK(BM_CoupledSetup)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Psi(benchmark::State& state) {
  const auto s = array(static_cast<int>(state.range(0)));
  const auto sys = build_coupled(s, 690.0, 1e4);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(s.num_transmembrane_nodes(), -80, 20);
  for (auto _ : state) benchmark::DoNotOptimize(sys.psi(v));
  state.counters["M0"] = static_cast<double>(s.num_transmembrane_nodes());
}
BENCHMARK(BM_Psi)->Arg(4)->Arg(10)->Arg(30);

void BM_RkcStep(benchmark::State& state) {
  const auto s = array(10);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  Stimulus stim;
  SplitRHS rhs;
  rhs.psi = [&sys](const Eigen::VectorXd& v) { return sys.psi(v); };
  rhs.model = &ms;
  rhs.stimulus = &stim;
  const auto n = s.num_transmembrane_nodes();
  MembraneState st;
  st.V = Eigen::VectorXd::Constant(n, -80.0);
  st.z = Eigen::MatrixXd::Ones(n, 1);
  StepperConfig cfg;
  cfg.dt = 0.02;
  const double rho = estimate_spectral_radius(rhs.psi, n).rho;
  StepInfo info;
  for (auto _ : state) benchmark::DoNotOptimize(rkc_step(st, rhs, cfg, rho, slow_radius(rhs, st), &info));
  state.counters["stages"] = info.stages;
}
BENCHMARK(BM_RkcStep)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
