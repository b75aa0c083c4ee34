#include "striplab/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "striplab/besov.hpp"
#include "striplab/spectral.hpp"

namespace striplab {

RemainderFields remainder(const AnisoState& aniso, const HydroState& hydro, double compat_tol) {
    if (!(aniso.u.grid() == hydro.u.grid()))
        throw std::invalid_argument("remainder: the two states live on different grids");
    const double tol = 1e-9 * std::max(1.0, std::abs(hydro.t));
    if (std::abs(aniso.t - hydro.t) > tol)
        throw std::invalid_argument("remainder: time mismatch, eps state at t = " +
                                    std::to_string(aniso.t) + ", hydrostatic at t = " +
                                    std::to_string(hydro.t));
    RemainderFields r{aniso.u - hydro.u, aniso.v - recover_v(hydro.u, compat_tol),
                      aniso.ut - hydro.ut, aniso.vt - recover_v(hydro.ut, compat_tol)};
    return r;
}

ForcingResidual forcing_residual(const AnisoState& aniso, const AnisoSolver& solver,
                                 const HydroState& hydro, const HydroOptions& hydro_opts) {
    if (!(aniso.u.grid() == hydro.u.grid()))
        throw std::invalid_argument("forcing_residual: grid mismatch");
    const double eps = aniso.eps;
    const double e2 = eps * eps;

    const AnisoRhsParts ap = solver.rhs(aniso);
    const HydroRhsParts hp = hydro_rhs(hydro, hydro_opts);

    // Hydrostatic vertical kinematics: v and its time derivatives are all
    // diagnosed from the corresponding u-level field.
    const Field2D vh = hp.v;
    const Field2D vth = recover_v(hydro.ut, hydro_opts.compat_tol);
    const Field2D vtth = recover_v(hp.acc, hydro_opts.compat_tol);

    // Forcing of the remainder system, assembled from the same dealiased
    // products the solvers use.
    Field2D f1 = e2 * d_dx(d_dx(hydro.u));
    if (hydro_opts.nonlinear) {
        f1 -= multiply(aniso.u, d_dx(aniso.u)) - multiply(hydro.u, d_dx(hydro.u));
        f1 -= multiply(aniso.v, d_dy(aniso.u)) - multiply(vh, d_dy(hydro.u));
    }
    Field2D f2 = vtth + vth - e2 * d_dx(d_dx(vh)) - d2_dy2(vh);
    if (hydro_opts.nonlinear)
        f2 += multiply(aniso.u, d_dx(aniso.v)) + multiply(aniso.v, d_dy(aniso.v));
    f2 *= -e2;

    // Left side of the remainder equations, using the solver accelerations
    // for the second time derivatives and q = p_eps - p_hydro.
    const Field2D du = aniso.u - hydro.u;
    const Field2D dv = aniso.v - vh;
    Field2D lhs1 = (ap.acc_u - hp.acc) + (aniso.ut - hydro.ut) - e2 * d_dx(d_dx(du)) - d2_dy2(du);
    lhs1 += d_dx(ap.pressure) - broadcast_y(hydro.u.grid(), hp.dxp);
    Field2D lhs2 = (ap.acc_v - vtth) + (aniso.vt - vth) - e2 * d_dx(d_dx(dv)) - d2_dy2(dv);
    lhs2 *= e2;
    lhs2 += d_dy(ap.pressure);

    ForcingResidual out;
    out.f1_norm = l2_norm(f1);
    out.f2_norm = l2_norm(f2);
    out.res1_abs = l2_norm(lhs1 - f1);
    out.res2_abs = l2_norm(lhs2 - f2);
    out.res1_rel = out.res1_abs / std::max(out.f1_norm, 1e-300);
    out.res2_rel = out.res2_abs / std::max(out.f2_norm, 1e-300);
    return out;
}

double eta_clock_driver(const AnisoState& aniso, const HydroState& hydro) {
    const double eps_part =
        besov_norm_pair(apply_weight(d_dy(aniso.u), aniso.band),
                        aniso.eps * apply_weight(d_dx(aniso.u), aniso.band), 0.5);
    const double hydro_part = besov_norm(apply_weight(d_dy(hydro.u), hydro.band), 0.5);
    return eps_part + hydro_part;
}

namespace {

void validate_paired(const PairedOptions& opts) {
    if (!(opts.eps > 0.0)) throw std::invalid_argument("run_paired: eps must be positive");
    if (!(opts.t_end > 0.0)) throw std::invalid_argument("run_paired: t_end must be positive");
    if (!(opts.mu >= opts.lambda))
        throw std::invalid_argument("run_paired: eta rate mu = " + std::to_string(opts.mu) +
                                    " must be at least lambda = " + std::to_string(opts.lambda));
    if (opts.row_cadence < 1) throw std::invalid_argument("run_paired: row_cadence must be >= 1");
}

}  // namespace

RemainderRecord run_paired(const GridSpec& grid, const InitialData& data,
                           const PairedOptions& opts) {
    grid.validate();
    validate_paired(opts);

    RemainderRecord rec;
    rec.eps = opts.eps;
    rec.eta_budget = opts.a / (2.0 * opts.mu);

    HydroOptions hopts;
    hopts.nonlinear = opts.nonlinear;
    hopts.compat_tol = opts.compat_tol;
    AnisoOptions aopts;
    aopts.nonlinear = opts.nonlinear;
    aopts.compat_tol = opts.compat_tol;

    HydroState hstate{data.u0, data.u1, 0.0,
                      make_band(opts.a, opts.lambda, ClockKind::Theta, grid)};
    AnisoState astate = prepare_initial(data.u0, data.u1, opts.eps,
                                        make_band(opts.a, opts.lambda, ClockKind::Tau, grid));
    AnalyticBandState eta = make_band(opts.a, opts.mu, ClockKind::Eta, grid);

    HydroStepper hstepper(grid, hopts);
    AnisoSolver asolver(grid, opts.eps, aopts);

    double dt = opts.dt;
    if (!(dt > 0.0)) dt = 0.9 * std::min(hydro_dt_max(hstate.u), aniso_dt_max(astate));
    const int steps = std::max(1, static_cast<int>(std::ceil(opts.t_end / dt - 1e-9)));
    dt = opts.t_end / steps;
    rec.dt = dt;

    std::vector<CheminLernerAccumulator> groups;
    for (int i = 0; i < 4; ++i) groups.emplace_back(0.5, TimeAggregate::SupInTime, grid);

    const double eps = opts.eps;
    auto fold = [&](double t, double slab, bool record) {
        const RemainderFields r = remainder(astate, hstate, opts.compat_tol);
        auto w = [&](const Field2D& f) { return apply_weight(f, eta); };
        const std::pair<Field2D, Field2D> pairs[4] = {
            {w(r.r1 + r.rt1), eps * w(r.r2 + r.rt2)},
            {w(d_dy(r.r1)), eps * w(d_dy(r.r2))},
            {w(d_dx(r.r1)), eps * w(d_dx(r.r2))},
            {w(r.rt1), eps * w(r.rt2)},
        };
        std::array<double, 4> inst{};
        for (int i = 0; i < 4; ++i) {
            groups[static_cast<size_t>(i)].update(pairs[i].first, pairs[i].second, t, slab);
            inst[static_cast<size_t>(i)] = besov_norm_pair(pairs[i].first, pairs[i].second, 0.5);
        }
        if (record) {
            rec.times.push_back(t);
            rec.group_norms.push_back(inst);
        }
    };

    const int mid = (steps - 1) / 2;
    bool mid_done = false;
    try {
        for (int n = 0; n < steps && !rec.failed; ++n) {
            const double cap = std::min(hydro_dt_max(hstate.u), aniso_dt_max(astate));
            if (dt > cap * (1.0 + 1e-12)) {
                rec.failed = true;
                rec.failure = "stability cap crossed at t = " + std::to_string(hstate.t) +
                              " (dt = " + std::to_string(dt) + ", cap = " + std::to_string(cap) +
                              ")";
                break;
            }
            fold(hstate.t, dt, n % opts.row_cadence == 0);
            const double d0 = eta_clock_driver(astate, hstate);
            const StepOutcome ho = hstepper.step(hstate, dt);
            const StepOutcome ao = asolver.step(astate, dt);
            if (ho == StepOutcome::BandExhausted || ao == StepOutcome::BandExhausted) {
                rec.failed = true;
                rec.failure = std::string(ho == StepOutcome::BandExhausted ? "theta" : "tau") +
                              " band exhausted at t = " + std::to_string(hstate.t);
                break;
            }
            const double d1 = eta_clock_driver(astate, hstate);
            if (step_clock(eta, 0.5 * (d0 + d1), dt) <= 0.0) {
                rec.failed = true;
                rec.failure = "eta band exhausted at t = " + std::to_string(eta.t);
                break;
            }
            if (n >= mid && !mid_done) {
                rec.mid_residual = forcing_residual(astate, asolver, hstate, hopts);
                mid_done = true;
            }
        }
        if (!rec.failed) fold(hstate.t, 0.0, true);
    } catch (const BlowUpError& e) {
        rec.failed = true;
        rec.failure = e.what();
    } catch (const BandExhaustedError& e) {
        rec.failed = true;
        rec.failure = e.what();
    }

    for (int i = 0; i < 4; ++i) rec.terminal_groups[static_cast<size_t>(i)] =
        groups[static_cast<size_t>(i)].total();
    rec.terminal_functional = 0.5 * rec.terminal_groups[0] + rec.terminal_groups[1] +
                              eps * rec.terminal_groups[2] + 0.5 * rec.terminal_groups[3];
    rec.eta_end = eta.clock;
    rec.eta_history = eta.history;
    return rec;
}

LogLogFit fit_loglog(const std::vector<double>& eps, const std::vector<double>& norms) {
    if (eps.size() != norms.size())
        throw std::invalid_argument("fit_loglog: eps and norms must have the same length");
    LogLogFit fit;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (eps[i] > 0.0 && norms[i] > 0.0) {
            lx.push_back(std::log(eps[i]));
            ly.push_back(std::log(norms[i]));
        }
    }
    for (size_t i = 0; i + 1 < lx.size(); ++i)
        fit.pair_slopes.push_back((ly[i] - ly[i + 1]) / (lx[i] - lx[i + 1]));
    if (lx.size() < 2) return fit;

    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.degenerate = false;
    return fit;
}

SweepResult sweep(const GridSpec& grid, const InitialData& data, const PairedOptions& base,
                  const std::vector<double>& eps_list, int workers) {
    if (eps_list.size() < 3)
        throw std::invalid_argument("sweep: need at least three eps values, got " +
                                    std::to_string(eps_list.size()));
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw std::invalid_argument("sweep: eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("sweep: eps list must be strictly decreasing");
    }

    SweepResult result;
    result.records.resize(eps_list.size());
    int nw = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    nw = std::max(1, std::min<int>(nw, static_cast<int>(eps_list.size())));

    // Chunked waves of identical runs; the merge is by index, so worker
    // scheduling cannot change the result.
    for (size_t base_i = 0; base_i < eps_list.size(); base_i += static_cast<size_t>(nw)) {
        std::vector<std::future<RemainderRecord>> wave;
        const size_t end = std::min(eps_list.size(), base_i + static_cast<size_t>(nw));
        for (size_t i = base_i; i < end; ++i) {
            PairedOptions opts = base;
            opts.eps = eps_list[i];
            wave.push_back(std::async(std::launch::async,
                                      [&grid, &data, opts] { return run_paired(grid, data, opts); }));
        }
        for (size_t i = base_i; i < end; ++i) result.records[i] = wave[i - base_i].get();
    }

    for (const RemainderRecord& rec : result.records) {
        if (rec.failed) continue;
        result.eps_ok.push_back(rec.eps);
        result.norms_ok.push_back(rec.terminal_functional);
    }
    result.fit = fit_loglog(result.eps_ok, result.norms_ok);
    result.degenerate = result.fit.degenerate;

    bool first = true;
    for (size_t i = 0; i < result.eps_ok.size(); ++i) {
        if (result.norms_ok[i] <= 0.0) continue;
        const double mhat = result.norms_ok[i] / result.eps_ok[i];
        if (first) {
            result.mhat_min = result.mhat_max = mhat;
            first = false;
        } else {
            result.mhat_min = std::min(result.mhat_min, mhat);
            result.mhat_max = std::max(result.mhat_max, mhat);
        }
    }
    if (!first && result.mhat_min > 0.0)
        result.mhat_variation = (result.mhat_max - result.mhat_min) / result.mhat_min;
    return result;
}

RefinementGate refinement_gate(const GridSpec& grid, const CatalogRequest& datum,
                               const PairedOptions& opts) {
    RefinementGate gate;

    const InitialData coarse_data = make_datum(grid, datum);
    PairedOptions copts = opts;
    const RemainderRecord coarse = run_paired(grid, coarse_data, copts);

    GridSpec fine = grid;
    fine.nx = ((3 * grid.nx / 2) + 1) & ~1;
    fine.ny = 3 * (grid.ny - 1) / 2 + 1;
    const InitialData fine_data = make_datum(fine, datum);
    PairedOptions fopts = opts;
    fopts.dt = coarse.dt / 2.0;
    const RemainderRecord refined = run_paired(fine, fine_data, fopts);

    gate.coarse_norm = coarse.terminal_functional;
    gate.fine_norm = refined.terminal_functional;
    if (coarse.failed || refined.failed) {
        gate.failed_run = true;
        gate.failure = coarse.failed ? coarse.failure : refined.failure;
        return gate;
    }
    gate.rel_change =
        std::abs(gate.fine_norm - gate.coarse_norm) / std::max(std::abs(gate.fine_norm), 1e-300);
    if (gate.fine_norm == 0.0 && gate.coarse_norm == 0.0) gate.rel_change = 0.0;
    gate.pass = gate.rel_change < 0.10;
    return gate;
}

}  // namespace striplab
