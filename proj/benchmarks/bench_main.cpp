// Microbenchmarks for the hot paths: transforms, dealiased products, the
// dyadic ladder, Besov norms, and one time step of each solver. Steppers are
// benchmarked on a fresh copy of the base state per iteration, so the copy
// cost is included; relative movement between runs is what matters here.

#include <benchmark/benchmark.h>

#include "striplab/aniso.hpp"
#include "striplab/band.hpp"
#include "striplab/besov.hpp"
#include "striplab/catalog.hpp"
#include "striplab/cutoff.hpp"
#include "striplab/hydro.hpp"
#include "striplab/spectral.hpp"

namespace {

using namespace striplab;

GridSpec bench_grid() {
    GridSpec g;
    g.nx = 64;
    g.ny = 65;
    return g;
}

InitialData bench_data(const GridSpec& g) {
    CatalogRequest req;
    req.name = "random-band";
    req.amplitude = 0.05;
    req.seed = 99;
    return make_datum(g, req);
}

void BM_Transform(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const std::vector<double> vals = inverse_transform(bench_data(g).u0);
    for (auto _ : state) {
        Field2D f = transform(g, vals);
        benchmark::DoNotOptimize(f);
    }
}
BENCHMARK(BM_Transform);

void BM_InverseTransform(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const Field2D f = bench_data(g).u0;
    for (auto _ : state) {
        std::vector<double> vals = inverse_transform(f);
        benchmark::DoNotOptimize(vals);
    }
}
BENCHMARK(BM_InverseTransform);

void BM_Multiply(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const InitialData data = bench_data(g);
    for (auto _ : state) {
        Field2D p = multiply(data.u0, data.u0);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_Multiply);

void BM_Ladder(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const Field2D f = bench_data(g).u0;
    for (auto _ : state) {
        DyadicLadder lad = ladder(f);
        benchmark::DoNotOptimize(lad);
    }
}
BENCHMARK(BM_Ladder);

void BM_BesovNorm(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const Field2D f = bench_data(g).u0;
    for (auto _ : state) {
        double n = besov_norm(f, 0.5);
        benchmark::DoNotOptimize(n);
    }
}
BENCHMARK(BM_BesovNorm);

void BM_HydroStep(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const InitialData data = bench_data(g);
    HydroState base;
    base.u = data.u0;
    base.ut = data.u1;
    base.band = make_band(0.4, 2.0, ClockKind::Theta, g);
    HydroStepper stepper(g);
    const double dt = 0.5 * hydro_dt_max(base.u);
    for (auto _ : state) {
        HydroState s = base;
        StepOutcome out = stepper.step(s, dt);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_HydroStep);

void BM_AnisoStep(benchmark::State& state) {
    const GridSpec g = bench_grid();
    const InitialData data = bench_data(g);
    const AnisoState base =
        prepare_initial(data.u0, data.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    AnisoSolver solver(g, 0.1);
    const double dt = 0.5 * aniso_dt_max(base);
    for (auto _ : state) {
        AnisoState s = base;
        StepOutcome out = solver.step(s, dt);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_AnisoStep);

}  // namespace

BENCHMARK_MAIN();
