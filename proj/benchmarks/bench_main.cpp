#include "anyon/afm_solver.hpp"
#include "anyon/fewbody_ed.hpp"
#include "anyon/fft.hpp"
#include "anyon/smeared_potential.hpp"

#include <benchmark/benchmark.h>

using namespace anyon;

namespace {

FieldConfig config(std::size_t n, double box, double beta, double R) {
    FieldConfig c;
    c.grid = Grid2D(box, n);
    c.beta = beta;
    c.R = R;
    return c;
}

void BM_TwoBodyMatvec(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    TwoBodyHamiltonian H(config(n, 4.0, 1.0, 0.5));
    const WaveFunction u = WaveFunction::random(H.config().grid, 1);
    const TwoBodyState psi = TwoBodyState::product(u, u);
    ComplexField out(H.dimension());
    for (auto _ : state) {
        H.apply(psi.values(), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(H.dimension()));
}
BENCHMARK(BM_TwoBodyMatvec)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_FreeSpaceConvolution(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid2D g(8.0, n);
    const SmearedKernel k(0.25);
    FreeSpaceConvolver conv(g, {[&k](Vec2 d) { return k.grad_perp(d).x; }});
    RealField f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::exp(-static_cast<double>(i % n) / static_cast<double>(n));
    for (auto _ : state) {
        RealField r = conv.apply(0, f);
        benchmark::DoNotOptimize(r.data());
    }
}
BENCHMARK(BM_FreeSpaceConvolution)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_EnergyEvaluation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    AverageFieldFunctional F(config(n, 8.0, 1.0, 0.25));
    const WaveFunction u = WaveFunction::random(F.config().grid, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(F.energy(u).total);
}
BENCHMARK(BM_EnergyEvaluation)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
