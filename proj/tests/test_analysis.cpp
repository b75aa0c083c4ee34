// Besov bookkeeping, paraproduct split, analytic-band weights, and the
// energy-ledger layer. Oracles: single-mode data (Besov norms reduce to a
// dyadic factor times the L2 size), constant-in-time streams (time-integrated
// norms factor into sqrt(T)), and small closed-form inequalities.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "striplab/band.hpp"
#include "striplab/besov.hpp"
#include "striplab/catalog.hpp"
#include "striplab/energy.hpp"
#include "striplab/hydro.hpp"
#include "striplab/spectral.hpp"

using namespace striplab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Field2D random_covered(const GridSpec& grid, std::uint64_t seed, int lo = 1, int hi = 12) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Field2D f(grid);
    for (int m = lo; m <= hi; ++m)
        for (int j = 0; j < grid.ny; ++j) {
            const double y = VerticalOps::get(grid).y(j);
            f.coeff(m, j) = std::complex<double>(unif(rng), unif(rng)) * std::sin(kPi * y);
            f.coeff(-m, j) = std::conj(f.coeff(m, j));
        }
    return f;
}

Field2D single_mode(const GridSpec& grid, int m, double amp) {
    return sample(grid, [&](double x, double) { return amp * std::cos(m * grid.xi(1) * x); });
}

}  // namespace

TEST_CASE("Besov norm of a single mode is a pure dyadic factor") {
    const GridSpec g;
    const double A = 0.8;
    const Field2D f = single_mode(g, 3, A);  // xi = 3 sits entirely in block q = 1
    const double l2 = l2_norm(f);
    CHECK(l2 == doctest::Approx(A / std::sqrt(2.0)).epsilon(1e-13));
    for (double s : {-1.0, 0.0, 0.5, 2.0}) {
        CHECK(besov_norm(f, s) == doctest::Approx(std::pow(2.0, s) * l2).epsilon(1e-12));
    }
    const BesovReport rep = besov_report(f, 0.5);
    CHECK(rep.per_block.size() == 4);
    CHECK(rep.per_block[1] == doctest::Approx(rep.total).epsilon(1e-12));
}

TEST_CASE("Besov exponent range is enforced and the x-mean column is ignored") {
    const GridSpec g;
    const Field2D f = random_covered(g, 31);
    CHECK_THROWS_AS(besov_norm(f, 6.5), std::invalid_argument);
    CHECK_THROWS_AS(besov_norm(f, -2.5), std::invalid_argument);

    Field2D mean_only(g);
    for (int j = 0; j < g.ny; ++j) mean_only.slot(0, j) = 1.0;
    CHECK(besov_norm(mean_only, 0.5) == 0.0);
}

TEST_CASE("pair norm is the block-wise hypot") {
    const GridSpec g;
    const Field2D f = random_covered(g, 41);
    CHECK(besov_norm_pair(f, Field2D(g), 0.5) ==
          doctest::Approx(besov_norm(f, 0.5)).epsilon(1e-13));
    CHECK(besov_norm_pair(f, f, 0.5) ==
          doctest::Approx(std::sqrt(2.0) * besov_norm(f, 0.5)).epsilon(1e-13));
}

TEST_CASE("block energies almost-orthogonally tile the spectrum") {
    const GridSpec g;
    // Modes 2..12 avoid the low-pass rung, so the blocks carry everything.
    const Field2D f = random_covered(g, 43, 2, 12);
    const double total = l2_norm(f) * l2_norm(f);
    double blocks = 0.0;
    const DyadicRange r = resolvable_range(g);
    for (int q = r.q_min; q <= r.q_max; ++q) {
        const double b = l2_norm(dyadic_project(f, q));
        blocks += b * b;
    }
    CHECK(blocks <= total * (1.0 + 1e-12));
    CHECK(blocks >= 0.5 * total * (1.0 - 1e-12));
}

TEST_CASE("Chemin-Lerner aggregates have closed forms on constant streams") {
    const GridSpec g;
    const Field2D f = random_covered(g, 47);
    const double b = besov_norm(f, 0.5);
    const double T = 0.8;
    const int n = 16;
    const double dt = T / n;

    CheminLernerAccumulator sup(0.5, TimeAggregate::SupInTime, g);
    CheminLernerAccumulator l2t(0.5, TimeAggregate::L2InTime, g);
    CheminLernerAccumulator wl2(0.5, TimeAggregate::WeightedL2InTime, g);
    for (int k = 0; k < n; ++k) {
        const double t = k * dt;
        sup.update(f, t, dt);
        l2t.update(f, t, dt);
        wl2.update(f, t, dt, 3.0);
    }
    CHECK(sup.total() == doctest::Approx(b).epsilon(1e-12));
    CHECK(l2t.total() == doctest::Approx(std::sqrt(T) * b).epsilon(1e-12));
    CHECK(wl2.total() == doctest::Approx(std::sqrt(3.0 * T) * b).epsilon(1e-12));

    // A zero-width touch refreshes the sup but adds nothing to integrals.
    const Field2D big = 2.0 * f;
    sup.update(big, T, 0.0);
    l2t.update(big, T, 0.0);
    CHECK(sup.total() == doctest::Approx(2.0 * b).epsilon(1e-12));
    CHECK(l2t.total() == doctest::Approx(std::sqrt(T) * b).epsilon(1e-12));
}

TEST_CASE("Chemin-Lerner rejects backwards samples and negative weights") {
    const GridSpec g;
    const Field2D f = random_covered(g, 53);
    CheminLernerAccumulator acc(0.5, TimeAggregate::L2InTime, g);
    acc.update(f, 0.0, 0.5);
    CHECK_THROWS_AS(acc.update(f, 0.2, 0.1), std::invalid_argument);
    CHECK_NOTHROW(acc.update(f, 0.5, 0.1));
    CHECK_THROWS_AS(acc.update(f, 0.6, -0.1), std::invalid_argument);

    CheminLernerAccumulator wacc(0.5, TimeAggregate::WeightedL2InTime, g);
    CHECK_THROWS_AS(wacc.update(f, 0.0, 0.1, -1.0), std::invalid_argument);
}

TEST_CASE("pair updates fold both fields block-wise") {
    const GridSpec g;
    const Field2D f = random_covered(g, 59);
    CheminLernerAccumulator pair(0.5, TimeAggregate::SupInTime, g);
    pair.update(f, f, 0.0, 0.1);
    CHECK(pair.total() == doctest::Approx(std::sqrt(2.0) * besov_norm(f, 0.5)).epsilon(1e-12));
}

TEST_CASE("Bony split reassembles the dealiased product") {
    const GridSpec g;
    for (std::uint64_t seed : {61u, 62u, 63u}) {
        const Field2D f = random_covered(g, seed);
        const Field2D h = random_covered(g, seed + 100);
        const BonyParts parts = bony_decompose(f, h);
        const Field2D prod = multiply(f, h);
        const Field2D re = parts.Tfg + parts.Tgf + parts.R;
        CHECK(l2_norm(re - prod) < 1e-12 * std::max(1.0, l2_norm(prod)));
    }
}

TEST_CASE("Bony split of a constant first factor has no high-frequency paraproduct") {
    const GridSpec g;
    Field2D c(g);
    for (int j = 0; j < g.ny; ++j) c.slot(0, j) = 0.7;
    const Field2D h = random_covered(g, 67);
    const BonyParts parts = bony_decompose(c, h);
    // The constant has no dyadic blocks, so the paraproduct keyed on its
    // blocks vanishes and c * h = Tfg + R exactly.
    CHECK(l2_norm(parts.Tgf) < 1e-14);
    CHECK(l2_norm(parts.Tfg + parts.R - multiply(c, h)) < 1e-12);
}

TEST_CASE("Bony split refuses uncovered content") {
    const GridSpec g;
    Field2D hot(g);
    for (int j = 0; j < g.ny; ++j) hot.coeff(18, j) = 1.0;  // above covered_xi = 12
    const Field2D ok = random_covered(g, 71);
    CHECK_THROWS_AS(bony_decompose(hot, ok), std::domain_error);
    CHECK_THROWS_AS(bony_decompose(ok, hot), std::domain_error);
}

// ---------------------------------------------------------------------------
// Analytic band
// ---------------------------------------------------------------------------

TEST_CASE("make_band validates its inputs and the overflow cap") {
    const GridSpec g;
    CHECK_THROWS_AS(make_band(-0.1, 2.0, ClockKind::Theta, g), std::invalid_argument);
    CHECK_THROWS_AS(make_band(0.4, -1.0, ClockKind::Theta, g), std::invalid_argument);
    // xi_max = 32: a = 10 puts a*xi_max = 320 over the exp overflow guard.
    CHECK_THROWS_AS(make_band(10.0, 2.0, ClockKind::Theta, g), std::invalid_argument);
    const AnalyticBandState band = make_band(0.4, 2.0, ClockKind::Theta, g);
    CHECK(band.band_width() == 0.4);
    CHECK(band.history.size() == 1);
}

TEST_CASE("apply_weight is the exact mode-wise exponential") {
    const GridSpec g;
    const AnalyticBandState band = make_band(0.3, 2.0, ClockKind::Theta, g);
    const Field2D f = single_mode(g, 4, 1.0);
    const Field2D wf = apply_weight(f, band);
    CHECK(l2_norm(wf) == doctest::Approx(std::exp(0.3 * 4.0) * l2_norm(f)).epsilon(1e-12));

    // Composing two half-width applications equals one full-width one.
    const Field2D twice = apply_weight_width(apply_weight_width(f, 0.15), 0.15);
    CHECK(l2_norm(twice - apply_weight_width(f, 0.3)) < 1e-12 * l2_norm(wf));
}

TEST_CASE("clock stepping shrinks the band and records history") {
    const GridSpec g;
    AnalyticBandState band = make_band(0.4, 2.0, ClockKind::Tau, g);
    CHECK_THROWS_AS(step_clock(band, -1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(step_clock(band, 1.0, 0.0), std::invalid_argument);

    const double w1 = step_clock(band, 0.05, 0.5);
    CHECK(band.clock == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(w1 == doctest::Approx(0.4 - 2.0 * 0.025).epsilon(1e-15));
    CHECK(band.history.size() == 2);
    CHECK(std::isnan(crossing_time(band)));

    // Drive it past exhaustion: width crosses zero inside the step.
    const double w2 = step_clock(band, 1.0, 0.2);
    CHECK(w2 <= 0.0);
    CHECK(band.exhausted());
    const double tc = crossing_time(band);
    CHECK(tc > 0.5);
    CHECK(tc <= 0.7 + 1e-12);

    const Field2D f = single_mode(g, 2, 1.0);
    CHECK_THROWS_AS(apply_weight(f, band), BandExhaustedError);
}

TEST_CASE("plus_abs preserves column norms and dominates products") {
    const GridSpec g;
    const Field2D f = random_covered(g, 73);
    const Field2D fp = plus_abs(f);
    CHECK(l2_norm(fp) == doctest::Approx(l2_norm(f)).epsilon(1e-13));
    const Eigen::VectorXd a = mode_l2(f);
    const Eigen::VectorXd b = mode_l2(fp);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);

    // Weighted-product domination, mode by mode.
    const Field2D h = random_covered(g, 74);
    const AnalyticBandState band = make_band(0.25, 2.0, ClockKind::Theta, g);
    const Field2D lhs = apply_weight(multiply(f, h), band);
    const Field2D rhs = multiply(plus_abs(apply_weight(f, band)), plus_abs(apply_weight(h, band)));
    for (int k = 0; k < g.nx; ++k)
        for (int j = 0; j < g.ny; ++j) {
            CHECK(std::abs(lhs.slot(k, j)) <= rhs.slot(k, j).real() + 1e-10);
        }
}

TEST_CASE("convexity of the weight exponent") {
    const GridSpec g;
    AnalyticBandState band = make_band(0.4, 2.0, ClockKind::Theta, g);
    for (double xi : {0.0, 1.0, 7.0, -3.0})
        for (double eta : {0.5, -2.0, 4.0}) {
            const ConvexityReport rep = convexity_check(xi, eta, band);
            CHECK(rep.ok);
            CHECK(rep.lhs <= rep.rhs + 1e-15);
        }
}

// ---------------------------------------------------------------------------
// Poincare, Agmon, smallness, ledger
// ---------------------------------------------------------------------------

TEST_CASE("discrete Poincare constants match the continuum and FD closed forms") {
    GridSpec cheb;
    CHECK(poincare_constant(cheb) == doctest::Approx(kPi * kPi).epsilon(1e-9));

    GridSpec fd;
    fd.ny = 9;
    fd.vertical = VerticalScheme::FiniteDifference2;
    const double h = 1.0 / 8.0;
    const double exact = 2.0 * (1.0 - std::cos(kPi * h)) / (h * h);
    CHECK(poincare_constant(fd) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("Agmon inequality holds for Dirichlet profiles") {
    const GridSpec g;
    const auto& ops = VerticalOps::get(g);
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(g.ny);
        for (int n = 1; n <= 8; ++n) {
            const double c = unif(rng) / n;
            for (int j = 0; j < g.ny; ++j) f(j) += c * std::sin(n * kPi * ops.y(j));
        }
        const double sup = f.cwiseAbs().maxCoeff();
        const double l2 = std::sqrt(ops.w.dot(f.cwiseProduct(f)));
        const Eigen::VectorXd df = ops.D * f;
        const double dl2 = std::sqrt(ops.w.dot(df.cwiseProduct(df)));
        CHECK(sup * sup <= 2.0 * l2 * dl2 * (1.0 + 1e-6));
    }
}

TEST_CASE("smallness check: zero data, homogeneity, thresholds") {
    const GridSpec g;
    const Field2D zero(g);
    const SmallnessReport z = smallness_check(zero, zero, 0.4, 1.0);
    CHECK(z.sum == 0.0);
    CHECK(z.pass);
    CHECK(z.pass_self);
    CHECK(z.threshold == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(z.c2 == doctest::Approx(1.0).epsilon(1e-15));  // c2 defaults to c0

    CatalogRequest req;
    req.name = "gauss-sine";
    req.amplitude = 0.05;
    const InitialData d = make_datum(g, req);
    const SmallnessReport s1 = smallness_check(d.u0, d.u1, 0.4, 1.0);
    const SmallnessReport s2 = smallness_check(3.0 * d.u0, 3.0 * d.u1, 0.4, 1.0);
    CHECK(s2.sum == doctest::Approx(3.0 * s1.sum).epsilon(1e-12));
    CHECK(s2.norm_dyu0 == doctest::Approx(3.0 * s1.norm_dyu0).epsilon(1e-12));

    CHECK_THROWS_AS(smallness_check(d.u0, d.u1, -0.4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(smallness_check(d.u0, d.u1, 0.4, 0.0), std::invalid_argument);
    // a * xi_max above the overflow guard reuses the band cap error.
    CHECK_THROWS_AS(smallness_check(d.u0, d.u1, 10.0, 1.0), std::invalid_argument);
}

TEST_CASE("ledger on a zero run accumulates nothing") {
    const GridSpec g;
    HydroState state;
    state.u = Field2D(g);
    state.ut = Field2D(g);
    state.band = make_band(0.4, 2.0, ClockKind::Theta, g);
    EnergyLedger ledger(g, LedgerKind::Hydro, {});
    ledger.set_initial(state);
    ledger.track(state, 0.1);  // pre-step state, upcoming dt
    state.t = 0.1;
    ledger.finish(state);
    const LedgerReport rep = ledger.report();
    REQUIRE(rep.per_s.size() == 1);
    CHECK(rep.per_s[0].lhs_total == 0.0);
    CHECK(rep.per_s[0].data_total == 0.0);
    CHECK(rep.per_s[0].ratio == 0.0);
    CHECK(ledger.csv_rows().size() == 3);
}

TEST_CASE("ledger instantaneous columns reduce to plain Besov norms") {
    const GridSpec g;
    CatalogRequest req;
    req.name = "gauss-sine";
    req.amplitude = 0.1;
    const InitialData d = make_datum(g, req);
    HydroState state;
    state.u = d.u0;
    state.ut = d.u1;
    state.band = make_band(0.4, 2.0, ClockKind::Theta, g);

    EnergyLedgerOptions opts;
    opts.R = 0.0;
    opts.apply_band_weight = false;
    EnergyLedger ledger(g, LedgerKind::Hydro, opts);
    ledger.set_initial(state);
    const LedgerReport rep = ledger.report();
    for (const LedgerTermView& term : rep.per_s[0].terms) {
        if (term.name == "sup_dyu")
            CHECK(term.instantaneous ==
                  doctest::Approx(besov_norm(d_dy(state.u), 0.5)).epsilon(1e-12));
        if (term.name == "sup_pair")
            CHECK(term.instantaneous ==
                  doctest::Approx(besov_norm(state.u + state.ut, 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("ledger L2-in-time terms grow like sqrt(T) on a frozen stream") {
    const GridSpec g;
    CatalogRequest req;
    req.name = "gauss-sine";
    req.amplitude = 0.1;
    const InitialData d = make_datum(g, req);
    HydroState state;
    state.u = d.u0;
    state.ut = d.u1;
    state.band = make_band(0.4, 2.0, ClockKind::Theta, g);

    EnergyLedgerOptions opts;
    opts.R = 0.0;
    EnergyLedger ledger(g, LedgerKind::Hydro, opts);
    ledger.set_initial(state);
    const double dt = 0.05;
    const int n = 20;  // T = 1; the state (and its band) never move
    for (int k = 0; k < n; ++k) {
        ledger.track(state, dt);
        state.t += dt;
    }
    state.t = 1.0;
    ledger.finish(state);

    const LedgerReport rep = ledger.report();
    const double inst = besov_norm(apply_weight(d_dy(state.u), state.band), 0.5);
    for (const LedgerTermView& term : rep.per_s[0].terms) {
        if (term.name == "l2_dyu")
            CHECK(term.accumulated ==
                  doctest::Approx(0.5 * std::sqrt(1.0) * inst).epsilon(1e-10));
        if (term.name == "sup_dyu")
            CHECK(term.accumulated == doctest::Approx(inst).epsilon(1e-10));
    }
}

TEST_CASE("ledger guards kind and call order") {
    const GridSpec g;
    EnergyLedger ledger(g, LedgerKind::Aniso, {});
    HydroState hstate;
    hstate.u = Field2D(g);
    hstate.ut = Field2D(g);
    hstate.band = make_band(0.4, 2.0, ClockKind::Theta, g);
    CHECK_THROWS_AS(ledger.set_initial(hstate), std::invalid_argument);

    EnergyLedger hydro(g, LedgerKind::Hydro, {});
    CHECK_THROWS_AS(hydro.track(hstate, 0.1), std::logic_error);

    EnergyLedgerOptions bad;
    bad.R = 10.0;  // above min(1/8, k/8)
    CHECK_THROWS_AS(EnergyLedger(g, LedgerKind::Hydro, bad), std::invalid_argument);

    // Vorticity ledgers consume hydro states.
    EnergyLedger vort(g, LedgerKind::Vorticity, {});
    CHECK_NOTHROW(vort.set_initial(hstate));
}
