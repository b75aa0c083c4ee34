#include "striplab/hydro.hpp"

#include <cmath>

#include "striplab/besov.hpp"
#include "stepper_util.hpp"

namespace striplab {

namespace {

/// The pressure gradient is constructed so every column mean of the
/// acceleration equals minus the mean of u_t, hence the means obey
/// m_u' = m_w, m_w' = -m_w exactly in the semi-discrete system. The split
/// Crank-Nicolson substeps freeze the pressure while treating dy^2
/// implicitly, which leaks an O(dt^3) mean defect per step; project it back
/// onto the corrector bump so recover_v keeps seeing compatible states.
void project_column_means(Field2D& u, Field2D& ut, const Profile& mean_u0, const Profile& mean_w0,
                          double elapsed, const Eigen::VectorXd& bump) {
    const double decay = std::exp(-elapsed);
    const Profile mean_u = mean_y(u);
    const Profile mean_w = mean_y(ut);
    for (int k = 0; k < u.nx(); ++k) {
        const std::complex<double> du = mean_u(k) - (mean_u0(k) + (1.0 - decay) * mean_w0(k));
        const std::complex<double> dw = mean_w(k) - decay * mean_w0(k);
        for (int j = 0; j < u.ny(); ++j) {
            u.slot(k, j) -= du * bump(j);
            ut.slot(k, j) -= dw * bump(j);
        }
    }
}

}  // namespace

Field2D recover_v(const Field2D& u, double tol) {
    const Profile mean = mean_y(u);
    double worst = 0.0;
    int worst_slot = 0;
    // Only modes that survive d/dx matter for v: the x-mean column and the
    // Nyquist slot are annihilated by it, so they cannot break v(1) = 0.
    for (int k = 1; k < u.nx(); ++k) {
        if (u.grid().mode_of_slot(k) == u.nx() / 2) continue;
        const double m = std::abs(mean(k));
        if (m > worst) {
            worst = m;
            worst_slot = k;
        }
    }
    if (worst > tol)
        throw std::invalid_argument(
            "recover_v: vertical mean of u must vanish, defect " + std::to_string(worst) +
            " at mode " + std::to_string(u.grid().mode_of_slot(worst_slot)) +
            " exceeds tol " + std::to_string(tol) + "; run enforce_compatibility first");
    Field2D v = integral_y_from_0(d_dx(u));
    v *= -1.0;
    return v;
}

Profile pressure_gradient(const Field2D& u) {
    const Field2D dyu = d_dy(u);
    const Profile shear_top = wall_trace(dyu, u.ny() - 1);
    const Profile shear_bot = wall_trace(dyu, 0);
    const Profile flux = mean_y(multiply(u, u));
    Profile dxp(u.nx());
    for (int k = 0; k < u.nx(); ++k) {
        const int m = u.grid().mode_of_slot(k);
        // d/dx on the flux, matching d_dx (Nyquist carries no derivative)
        const std::complex<double> ixi =
            m == u.nx() / 2 ? std::complex<double>(0.0, 0.0)
                            : std::complex<double>(0.0, u.grid().xi(m));
        dxp(k) = shear_top(k) - shear_bot(k) - ixi * flux(k);
    }
    return dxp;
}

HydroRhsParts hydro_rhs(const HydroState& state, const HydroOptions& opts) {
    HydroRhsParts parts;
    parts.acc = d2_dy2(state.u);
    parts.acc -= state.ut;
    if (opts.nonlinear) {
        parts.v = recover_v(state.u, opts.compat_tol);
        parts.nonlinear = multiply(state.u, d_dx(state.u));
        parts.nonlinear += multiply(parts.v, d_dy(state.u));
        parts.acc -= parts.nonlinear;
        parts.dxp = pressure_gradient(state.u);
    } else {
        parts.v = Field2D(state.u.grid());
        parts.nonlinear = Field2D(state.u.grid());
        // Keep the wall-shear part: it is what preserves the vertical mean
        // (and the zero net flux) of the linear dynamics as well.
        const Field2D dyu = d_dy(state.u);
        parts.dxp = wall_trace(dyu, state.u.ny() - 1) - wall_trace(dyu, 0);
    }
    parts.acc -= broadcast_y(state.u.grid(), parts.dxp);
    return parts;
}

double hydro_dt_max(const Field2D& u) {
    const double dx = u.grid().Lx / u.grid().nx;
    const double umax = std::max(max_abs(u), 1e-12);
    return 0.25 * std::min(dx / umax, 1.0);
}

Field2D enforce_compatibility(const Field2D& u) {
    const GridSpec& grid = u.grid();
    const Eigen::VectorXd bump = detail::unit_mass_bump(grid);
    const Profile mean = mean_y(u);
    Field2D out = u;
    for (int k = 0; k < grid.nx; ++k) {
        if (mean(k) == std::complex<double>(0.0, 0.0)) continue;
        for (int j = 0; j < grid.ny; ++j) out.slot(k, j) -= mean(k) * bump(j);
    }
    return out;
}

double theta_driver(const HydroState& state) {
    return besov_norm(apply_weight(d_dy(state.u), state.band), 0.5);
}

HydroStepper::HydroStepper(const GridSpec& grid, HydroOptions opts) : grid_(grid), opts_(opts) {
    grid.validate();
    const auto& ops = VerticalOps::get(grid);
    const int ni = grid.ny - 2;
    Lint_ = ops.D2.block(1, 1, ni, ni);
    bump_ = detail::unit_mass_bump(grid);
}

void HydroStepper::refresh(double dt) {
    if (dt == cached_dt_) return;
    const int ni = grid_.ny - 2;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ni, ni);
    auto make = [&](double h) {
        return Eigen::PartialPivLU<Eigen::MatrixXd>((1.0 + 0.5 * h) * I - 0.25 * h * h * Lint_);
    };
    lu_full_ = make(dt);
    lu_half_ = make(0.5 * dt);
    cached_dt_ = dt;
}

void HydroStepper::cn_substep(Field2D& u, Field2D& ut, const Field2D& forcing, double dt,
                              const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) const {
    using detail::Packed;
    Packed U = detail::pack_interior(u);
    Packed W = detail::pack_interior(ut);
    const Packed G = detail::pack_interior(forcing);

    // Crank-Nicolson on u' = w, w' = L u - w + G with G held constant:
    //   [(1 + dt/2) I - dt^2/4 L] w+ = (1 - dt/2) w + dt/2 L (2u + dt/2 w) + dt G
    //   u+ = u + dt/2 (w + w+)
    auto advance = [&](Eigen::MatrixXd& Um, Eigen::MatrixXd& Wm, const Eigen::MatrixXd& Gm) {
        const Eigen::MatrixXd b1 = Um + (0.5 * dt) * Wm;
        const Eigen::MatrixXd rhs =
            (1.0 - 0.5 * dt) * Wm + (0.5 * dt) * (Lint_ * (Um + b1)) + dt * Gm;
        Wm = lu.solve(rhs);
        Um = b1 + (0.5 * dt) * Wm;
    };
    advance(U.re, W.re, G.re);
    advance(U.im, W.im, G.im);

    detail::unpack_interior(U, u);
    detail::unpack_interior(W, ut);
}

StepOutcome HydroStepper::step(HydroState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("HydroStepper::step: dt must be positive");
    const double cap = hydro_dt_max(state.u);
    if (dt > cap * (1.0 + 1e-12))
        throw std::invalid_argument("HydroStepper::step: dt = " + std::to_string(dt) +
                                    " exceeds the advective bound " + std::to_string(cap));
    refresh(dt);

    const bool clock_live = state.band.rate > 0.0;
    const double driver0 = clock_live ? theta_driver(state) : 0.0;
    const Profile mean_u0 = mean_y(state.u);
    const Profile mean_w0 = mean_y(state.ut);

    // Half step with forcing frozen at t_n.
    const HydroRhsParts parts0 = hydro_rhs(state, opts_);
    Field2D g0 = parts0.nonlinear;
    g0 *= -1.0;
    g0 -= broadcast_y(grid_, parts0.dxp);
    Field2D uh = state.u, wh = state.ut;
    cn_substep(uh, wh, g0, 0.5 * dt, lu_half_);
    project_column_means(uh, wh, mean_u0, mean_w0, 0.5 * dt, bump_);

    // Forcing and clock driver re-evaluated at the midpoint state.
    HydroState mid;
    mid.u = uh;
    mid.ut = wh;
    mid.t = state.t + 0.5 * dt;
    mid.band = state.band;
    mid.band.clock += 0.5 * dt * driver0;
    double driver_mid = driver0;
    if (clock_live && !mid.band.exhausted()) driver_mid = theta_driver(mid);

    const HydroRhsParts parts_mid = hydro_rhs(mid, opts_);
    Field2D gmid = parts_mid.nonlinear;
    gmid *= -1.0;
    gmid -= broadcast_y(grid_, parts_mid.dxp);

    cn_substep(state.u, state.ut, gmid, dt, lu_full_);
    project_column_means(state.u, state.ut, mean_u0, mean_w0, dt, bump_);
    state.t += dt;
    step_clock(state.band, driver_mid, dt);

    if (!state.u.finite() || !state.ut.finite())
        throw BlowUpError(state.t, "hydrostatic solution lost finiteness at t = " +
                                       std::to_string(state.t));
    return state.band.exhausted() ? StepOutcome::BandExhausted : StepOutcome::Ok;
}

}  // namespace striplab
