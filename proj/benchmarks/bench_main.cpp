#include <benchmark/benchmark.h>

#include "eqmorse/cochain.hpp"
#include "eqmorse/critstruct.hpp"
#include "eqmorse/flow.hpp"
#include "eqmorse/profile.hpp"
#include "eqmorse/rational_matrix.hpp"

namespace {

using namespace eqmorse;

struct Fixture {
  Scenario s;
  CriticalAnalysis a;
  explicit Fixture(const std::string& name) : s(build_scenario(name)), a(analyze_scenario(s)) {}
};

const Fixture& torus() {
  static const Fixture f("mapping_torus_stabilized");
  return f;
}

void BM_Profile(benchmark::State& state) {
  const BumpProfile p = make_profile(0.1, 0.0125);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-4;
    if (t > 0.5) t = 0.0;
    benchmark::DoNotOptimize(phi_jet(p, t));
    benchmark::DoNotOptimize(psi_jet(p, t));
  }
}
BENCHMARK(BM_Profile);

void BM_Gradient(benchmark::State& state) {
  const Fixture& f = torus();
  const auto pts = sample_points(f.s, 6);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.s.gradient(pts[i]));
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_Gradient);

void BM_CriticalAnalysis(benchmark::State& state) {
  const Scenario s = build_scenario("mapping_torus");
  for (auto _ : state) benchmark::DoNotOptimize(analyze_scenario(s));
}
BENCHMARK(BM_CriticalAnalysis)->Unit(benchmark::kMillisecond);

void BM_ShootRay(benchmark::State& state) {
  const Fixture& f = torus();
  const CriticalOrbit& q = f.a.by_label("Q1");
  FlowSettings fs;
  for (auto _ : state) benchmark::DoNotOptimize(shoot_ray(f.s, f.a, q, 0.0, 0.0, fs));
}
BENCHMARK(BM_ShootRay)->Unit(benchmark::kMillisecond);

void BM_CoverExtraction(benchmark::State& state) {
  const Fixture& f = torus();
  const CriticalOrbit& src = f.a.by_label("Q1");
  const CriticalOrbit& tgt = f.a.by_label("S0");
  FlowSettings fs;
  fs.samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extract_moduli_cover(f.s, f.a, src, tgt, fs));
}
BENCHMARK(BM_CoverExtraction)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RationalRank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = Rational(static_cast<long>((i * 7 + j * 3) % 5) - 2, 1 + (i + j) % 3);
  for (auto _ : state) benchmark::DoNotOptimize(rank(m));
}
BENCHMARK(BM_RationalRank)->Arg(12)->Arg(48);

void BM_CartanAssembly(benchmark::State& state) {
  const Fixture& f = torus();
  std::vector<ModuliCover> covers;
  for (const auto& [sid, tid] : required_covers(f.s, f.a)) {
    const CriticalOrbit* src = nullptr;
    const CriticalOrbit* tgt = nullptr;
    for (const auto& o : f.a.orbits) {
      if (o.id == sid) src = &o;
      if (o.id == tid) tgt = &o;
    }
    covers.push_back(extract_moduli_cover(f.s, f.a, *src, *tgt, FlowSettings{}));
  }
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const CochainComplex c = assemble_cartan(f.s, f.a, covers, k);
    benchmark::DoNotOptimize(cohomology(c));
  }
}
BENCHMARK(BM_CartanAssembly)->Arg(6)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
