// Solver-layer tests: the diagnosed vertical velocity and pressure gradient
// (trigonometric closed forms), the semi-discrete mean identity, stepping
// invariants (zero data, energy decay, exact damped-wave modes), the
// eps-system pressure and divergence machinery, and the paired-run helpers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "striplab/aniso.hpp"
#include "striplab/band.hpp"
#include "striplab/besov.hpp"
#include "striplab/catalog.hpp"
#include "striplab/convergence.hpp"
#include "striplab/hydro.hpp"
#include "striplab/spectral.hpp"

using namespace striplab;

namespace {

constexpr double kPi = 3.14159265358979323846;

InitialData small_datum(const GridSpec& g, double amp = 0.05) {
    CatalogRequest req;
    req.name = "gauss-sine";
    req.amplitude = amp;
    return make_datum(g, req);
}

HydroState make_hydro_state(const GridSpec& g, const InitialData& d) {
    HydroState s;
    s.u = d.u0;
    s.ut = d.u1;
    s.band = make_band(0.4, 2.0, ClockKind::Theta, g);
    return s;
}

}  // namespace

TEST_CASE("recover_v matches the closed-form stream integral") {
    const GridSpec g;
    const double xi1 = g.xi(1);
    const Field2D u = sample(
        g, [&](double x, double y) { return std::sin(xi1 * x) * std::sin(2.0 * kPi * y); });
    const Field2D v = recover_v(u);
    const Field2D exact = sample(g, [&](double x, double y) {
        return -xi1 * std::cos(xi1 * x) * (1.0 - std::cos(2.0 * kPi * y)) / (2.0 * kPi);
    });
    CHECK(l2_norm(v - exact) < 1e-12);
    // The ceiling trace vanishes because the vertical mean of u does.
    CHECK(wall_trace(v, g.ny - 1).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("recover_v rejects incompatible data but ignores exempt columns") {
    const GridSpec g;
    const double xi1 = g.xi(1);
    const Field2D bad =
        sample(g, [&](double x, double y) { return std::sin(xi1 * x) * y * (1.0 - y); });
    CHECK_THROWS_AS(recover_v(bad), std::invalid_argument);
    CHECK_NOTHROW(recover_v(bad, 1.0));  // generous tolerance admits it

    // x-mean column and the Nyquist slot never enter v.
    Field2D exempt(g);
    for (int j = 0; j < g.ny; ++j) {
        exempt.slot(0, j) = 1.0;             // nonzero mean, no x-dependence
        exempt.slot(g.nx / 2, j) = 0.5;      // folded cosine: d_dx drops it
    }
    Field2D v;
    CHECK_NOTHROW(v = recover_v(exempt));
    CHECK(l2_norm(v) == 0.0);
}

TEST_CASE("pressure gradient balances shear and flux terms") {
    const GridSpec g;
    const double xi1 = g.xi(1);
    const double A = 0.3;
    const Field2D u =
        sample(g, [&](double x, double y) { return A * std::sin(xi1 * x) * std::sin(kPi * y); });
    const Profile dxp = pressure_gradient(u);

    // Shear part: dy u at the walls is A pi sin(xi x) * (cos(pi) - cos(0)) =
    // -2 A pi sin(xi x), landing on modes +-1.
    const std::complex<double> expect1(0.0, A * kPi);  // sin -> -+ i/2 coefficients
    CHECK(std::abs(dxp(1) - expect1) < 1e-10);
    CHECK(std::abs(dxp(g.nx - 1) - std::conj(expect1)) < 1e-10);

    // Flux part: -d/dx of the vertical mean of u^2. With int sin^2(pi y) = 1/2,
    // u^2 averages to A^2(1 - cos(2 xi x))/4, so modes +-2 carry
    // -d/dx(-A^2 cos(2 xi x)/4) = -A^2 xi sin(2 xi x)/2.
    const std::complex<double> expect2 =
        std::complex<double>(0.0, 1.0) * (A * A * xi1 / 4.0);
    CHECK(std::abs(dxp(2) - expect2) < 1e-10);
    CHECK(std::abs(dxp(g.nx - 2) - std::conj(expect2)) < 1e-10);
}

TEST_CASE("acceleration keeps the vertical-mean law mode by mode") {
    const GridSpec g;
    const InitialData d = small_datum(g, 0.2);
    HydroState state = make_hydro_state(g, d);
    const HydroRhsParts parts = hydro_rhs(state);
    const Profile mean_acc = mean_y(parts.acc);
    const Profile mean_ut = mean_y(state.ut);
    CHECK((mean_acc + mean_ut).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("advective step bound") {
    const GridSpec g;
    const Field2D u = sample(g, [&](double x, double) { return 2.0 * std::cos(g.xi(1) * x); });
    const double dx = g.Lx / g.nx;
    CHECK(hydro_dt_max(u) == doctest::Approx(0.25 * dx / 2.0).epsilon(1e-10));
    CHECK(hydro_dt_max(Field2D(g)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("enforce_compatibility is an idempotent wall-preserving projection") {
    const GridSpec g;
    const double xi1 = g.xi(1);
    const Field2D u =
        sample(g, [&](double x, double y) { return std::sin(xi1 * x) * y * (1.0 - y); });
    const Field2D fixed = enforce_compatibility(u);
    CHECK(mean_y(fixed).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(wall_trace(fixed, 0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(wall_trace(fixed, g.ny - 1).cwiseAbs().maxCoeff() < 1e-14);
    const Field2D again = enforce_compatibility(fixed);
    CHECK(l2_norm(again - fixed) < 1e-14);
    CHECK_NOTHROW(recover_v(fixed));
}

TEST_CASE("zero data stays exactly zero for a thousand steps") {
    const GridSpec g;
    HydroState state;
    state.u = Field2D(g);
    state.ut = Field2D(g);
    state.band = make_band(0.4, 2.0, ClockKind::Theta, g);
    HydroStepper stepper(g);
    for (int k = 0; k < 1000; ++k) REQUIRE(stepper.step(state, 0.2) == StepOutcome::Ok);
    CHECK(l2_norm(state.u) == 0.0);
    CHECK(l2_norm(state.ut) == 0.0);
    CHECK(state.band.clock == 0.0);
    CHECK(state.t == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("stepper enforces the advective cap") {
    const GridSpec g;
    const InitialData d = small_datum(g, 2.0);
    HydroState state = make_hydro_state(g, d);
    HydroStepper stepper(g);
    CHECK_THROWS_AS(stepper.step(state, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(stepper.step(state, -0.1), std::invalid_argument);
}

TEST_CASE("linear stepper reproduces the exact damped mode") {
    const GridSpec g;
    const double xi1 = g.xi(1);
    const double A = 0.01;
    const Field2D u0 = sample(
        g, [&](double x, double y) { return A * std::cos(xi1 * x) * std::sin(2.0 * kPi * y); });

    HydroOptions opts;
    opts.nonlinear = false;
    HydroStepper stepper(g, opts);
    HydroState state;
    state.u = u0;
    state.ut = Field2D(g);
    state.band = make_band(0.4, 2.0, ClockKind::Theta, g);

    const double t_end = 0.5;
    const int n = 512;
    const double dt = t_end / n;
    for (int k = 0; k < n; ++k) REQUIRE(stepper.step(state, dt) == StepOutcome::Ok);

    // The sin(2 pi y) profile kills the pressure, so each mode obeys
    // sigma^2 + sigma + (2 pi)^2 = 0: a damped oscillation at
    // omega = sqrt(4 pi^2 - 1/4).
    const double omega = std::sqrt(4.0 * kPi * kPi - 0.25);
    const double amp = std::exp(-0.5 * t_end) *
                       (std::cos(omega * t_end) + 0.5 / omega * std::sin(omega * t_end));
    const Field2D exact = amp * u0;
    CHECK(l2_norm(state.u - exact) < 2e-6 * A);
}

TEST_CASE("theta driver is the weighted Besov norm of the shear") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const HydroState state = make_hydro_state(g, d);
    const double direct = besov_norm(apply_weight(d_dy(state.u), state.band), 0.5);
    CHECK(theta_driver(state) == doctest::Approx(direct).epsilon(1e-13));
}

// ---------------------------------------------------------------------------
// eps-system
// ---------------------------------------------------------------------------

TEST_CASE("prepare_initial diagnoses the vertical component") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const AnalyticBandState band = make_band(0.4, 2.0, ClockKind::Tau, g);
    const AnisoState state = prepare_initial(d.u0, d.u1, 0.1, band);
    CHECK(state.eps == 0.1);
    CHECK(l2_norm(state.v - recover_v(d.u0)) < 1e-14);
    CHECK(l2_norm(state.vt - recover_v(d.u1)) < 1e-14);
    CHECK(divergence_defect(state.u, state.v) < 1e-13);

    CHECK_THROWS_AS(prepare_initial(d.u0, d.u1, 0.0, band), std::invalid_argument);
    CHECK_THROWS_AS(prepare_initial(d.u0, d.u1, 1.5, band), std::invalid_argument);
}

TEST_CASE("eps energy matches its definition term by term") {
    const GridSpec g;
    const InitialData d = small_datum(g, 0.3);
    AnisoState state = prepare_initial(d.u0, d.u1, 0.2, make_band(0.4, 2.0, ClockKind::Tau, g));
    const double eps = state.eps;
    auto sq = [](double x) { return x * x; };
    const double direct = 0.5 * sq(l2_norm(state.ut)) + 0.5 * eps * eps * sq(l2_norm(state.vt)) +
                          0.5 * sq(l2_norm(d_dy(state.u))) +
                          0.5 * eps * eps * sq(l2_norm(d_dy(state.v))) +
                          0.5 * eps * eps * sq(l2_norm(d_dx(state.u))) +
                          0.5 * eps * eps * eps * eps * sq(l2_norm(d_dx(state.v)));
    CHECK(eps_energy(state) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("aniso step bound combines the advective and wave caps") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const AnisoState state = prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    CHECK(aniso_dt_max(state) ==
          doctest::Approx(std::min(hydro_dt_max(state.u), 0.5 * 0.1 / g.xi_max()))
              .epsilon(1e-13));
}

TEST_CASE("pressure solve leaves the acceleration divergence-free") {
    const GridSpec g;
    const InitialData d = small_datum(g, 0.2);
    const AnisoState state =
        prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    AnisoSolver solver(g, 0.1);
    const AnisoRhsParts parts = solver.rhs(state);
    CHECK(parts.div_acc < 1e-8);
    CHECK(parts.compat_residual < 1e-10);
    // The wall rows of acc_v vanish: the Neumann data was built from them.
    CHECK(wall_trace(parts.acc_v, 0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(wall_trace(parts.acc_v, g.ny - 1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("aniso zero data stays zero and conserves the band") {
    const GridSpec g;
    AnisoState state;
    state.u = Field2D(g);
    state.ut = Field2D(g);
    state.v = Field2D(g);
    state.vt = Field2D(g);
    state.eps = 0.1;
    state.band = make_band(0.4, 2.0, ClockKind::Tau, g);
    AnisoSolver solver(g, 0.1);
    const double dt = 0.9 * aniso_dt_max(state);
    for (int k = 0; k < 100; ++k) REQUIRE(solver.step(state, dt) == StepOutcome::Ok);
    CHECK(eps_energy(state) == 0.0);
    CHECK(state.band.clock == 0.0);
}

TEST_CASE("linear eps-system energy is nonincreasing step by step") {
    const GridSpec g;
    const InitialData d = small_datum(g, 0.2);
    AnisoOptions opts;
    opts.nonlinear = false;
    AnisoState state =
        prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    AnisoSolver solver(g, 0.1, opts);
    const double dt = 0.9 * aniso_dt_max(state);
    double prev = eps_energy(state);
    for (int k = 0; k < 200; ++k) {
        REQUIRE(solver.step(state, dt) == StepOutcome::Ok);
        const double now = eps_energy(state);
        CHECK(now <= prev + 1e-10);
        prev = now;
    }
}

TEST_CASE("tau driver combines both shear norms under the weight") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const AnisoState state =
        prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    const double direct = besov_norm(apply_weight(d_dy(state.u), state.band), 0.5) +
                          0.1 * besov_norm(apply_weight(d_dy(state.v), state.band), 0.5);
    CHECK(tau_driver(state) == doctest::Approx(direct).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Paired-run machinery
// ---------------------------------------------------------------------------

TEST_CASE("remainder vanishes for matching well-prepared states") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const AnisoState astate =
        prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    HydroState hstate = make_hydro_state(g, d);
    const RemainderFields r = remainder(astate, hstate);
    CHECK(l2_norm(r.r1) < 1e-14);
    CHECK(l2_norm(r.r2) < 1e-14);
    CHECK(l2_norm(r.rt1) < 1e-14);
    CHECK(l2_norm(r.rt2) < 1e-14);

    hstate.t = 0.5;  // time-stamp mismatch
    CHECK_THROWS_AS(remainder(astate, hstate), std::invalid_argument);
}

TEST_CASE("forcing residual certifies the discrete remainder algebra") {
    const GridSpec g;
    const InitialData d = small_datum(g);
    const AnisoState astate =
        prepare_initial(d.u0, d.u1, 0.1, make_band(0.4, 2.0, ClockKind::Tau, g));
    const HydroState hstate = make_hydro_state(g, d);
    AnisoSolver solver(g, 0.1);
    const ForcingResidual res = forcing_residual(astate, solver, hstate, {});
    CHECK(res.f1_norm > 0.0);
    CHECK(res.res1_rel < 1e-6);
    CHECK(res.res2_rel < 1e-6);
}

TEST_CASE("loglog fit recovers exact power laws") {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> norms;
    for (double e : eps) norms.push_back(3.0 * e * e);
    const LogLogFit fit = fit_loglog(eps, norms);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.residual < 1e-12);
    REQUIRE(fit.pair_slopes.size() == 3);
    for (double s : fit.pair_slopes) CHECK(s == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(fit_loglog({0.1}, {1.0}).degenerate);
    CHECK(fit_loglog({0.1, 0.05}, {0.0, 0.0}).degenerate);
}

TEST_CASE("a short paired run stays inside its eta budget") {
    GridSpec g;
    g.nx = 32;
    g.ny = 33;
    const InitialData d = small_datum(g);
    PairedOptions opts;
    opts.eps = 0.1;
    opts.t_end = 0.25;
    const RemainderRecord rec = run_paired(g, d, opts);
    REQUIRE_FALSE(rec.failed);
    CHECK(rec.eta_end < rec.eta_budget);
    CHECK(rec.terminal_functional > 0.0);
    CHECK(rec.times.size() == rec.group_norms.size());
    CHECK(rec.mid_residual.res1_rel < 1e-6);
}

TEST_CASE("linear remainder scaling follows the even-order law") {
    GridSpec g;
    g.nx = 32;
    g.ny = 33;
    const InitialData d = small_datum(g);
    PairedOptions opts;
    opts.t_end = 0.25;
    opts.nonlinear = false;
    std::vector<double> eps{0.1, 0.05, 0.025};
    std::vector<double> norms;
    for (double e : eps) {
        PairedOptions o = opts;
        o.eps = e;
        const RemainderRecord rec = run_paired(g, d, o);
        REQUIRE_FALSE(rec.failed);
        norms.push_back(rec.terminal_functional);
    }
    const LogLogFit fit = fit_loglog(eps, norms);
    REQUIRE_FALSE(fit.degenerate);
    CHECK(fit.slope > 1.8);
    CHECK(fit.slope < 2.2);
}
