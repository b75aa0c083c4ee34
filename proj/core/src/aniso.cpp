#include "striplab/aniso.hpp"

#include <cmath>

#include "striplab/besov.hpp"
#include "striplab/spectral.hpp"
#include "stepper_util.hpp"

namespace striplab {

namespace {

/// L2 over interior collocation rows only (wall rows carry boundary data,
/// not equations).
double interior_l2(const Field2D& f) {
    const auto& w = VerticalOps::get(f.grid()).w;
    double acc = 0.0;
    for (int k = 0; k < f.nx(); ++k)
        for (int j = 1; j < f.ny() - 1; ++j) acc += w(j) * std::norm(f.slot(k, j));
    return std::sqrt(std::max(acc, 0.0));
}

/// Incompressibility pins the column means of u on every slot that survives
/// d/dx: the mean acceleration vanishes there, so the mean of ut is
/// conserved and the mean of u moves affinely. The split Crank-Nicolson
/// substeps leak an O(dt^3) defect per step (pressure frozen while dy^2 is
/// implicit); project it onto the corrector bump so the cleaning reset keeps
/// seeing compatible states. The x-mean column and the Nyquist slot carry no
/// such constraint and are left alone.
void project_column_means(Field2D& u, Field2D& ut, const Profile& mean_u0, const Profile& mean_w0,
                          double elapsed, const Eigen::VectorXd& bump) {
    const Profile mean_u = mean_y(u);
    const Profile mean_w = mean_y(ut);
    for (int k = 1; k < u.nx(); ++k) {
        if (u.grid().mode_of_slot(k) == u.nx() / 2) continue;
        const std::complex<double> du = mean_u(k) - (mean_u0(k) + elapsed * mean_w0(k));
        const std::complex<double> dw = mean_w(k) - mean_w0(k);
        for (int j = 0; j < u.ny(); ++j) {
            u.slot(k, j) -= du * bump(j);
            ut.slot(k, j) -= dw * bump(j);
        }
    }
}

}  // namespace

double eps_energy(const AnisoState& s) {
    const double e2 = s.eps * s.eps;
    const double ut = l2_norm(s.ut), vt = l2_norm(s.vt);
    const double uy = l2_norm(d_dy(s.u)), vy = l2_norm(d_dy(s.v));
    const double ux = l2_norm(d_dx(s.u)), vx = l2_norm(d_dx(s.v));
    return 0.5 * (ut * ut + e2 * vt * vt + uy * uy + e2 * vy * vy + e2 * ux * ux +
                  e2 * e2 * vx * vx);
}

double divergence_defect(const Field2D& u, const Field2D& v) {
    return interior_l2(d_dx(u) + d_dy(v));
}

double aniso_dt_max(const AnisoState& state) {
    return std::min(hydro_dt_max(state.u), 0.5 * state.eps / state.u.grid().xi_max());
}

AnisoState prepare_initial(const Field2D& u0, const Field2D& u1, double eps,
                           const AnalyticBandState& band) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("prepare_initial: eps must lie in (0, 1], got " +
                                    std::to_string(eps));
    AnisoState s;
    s.u = u0;
    s.ut = u1;
    s.v = recover_v(u0);
    s.vt = recover_v(u1);
    s.eps = eps;
    s.band = band;
    s.band.kind = ClockKind::Tau;
    return s;
}

double tau_driver(const AnisoState& s) {
    return besov_norm(apply_weight(d_dy(s.u), s.band), 0.5) +
           s.eps * besov_norm(apply_weight(d_dy(s.v), s.band), 0.5);
}

/// Per-|m| LU factors of the pressure operator -xi^2 + eps^-2 dy^2 with
/// Neumann rows at the walls; the xi = 0 operator is bordered with the
/// quadrature row (zero-mean gauge) and a multiplier column on the interior
/// equations.
struct AnisoSolver::PressureLU {
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> by_mode;  // |m| = 1..nx/2
    Eigen::PartialPivLU<Eigen::MatrixXd> gauge;                 // bordered xi = 0
};

AnisoSolver::AnisoSolver(const GridSpec& grid, double eps, AnisoOptions opts)
    : grid_(grid), eps_(eps), opts_(opts) {
    grid.validate();
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("AnisoSolver: eps must lie in (0, 1], got " +
                                    std::to_string(eps));
    const auto& ops = VerticalOps::get(grid);
    const int ny = grid.ny, ni = ny - 2;
    Lint_base_ = ops.D2.block(1, 1, ni, ni);
    bump_ = detail::unit_mass_bump(grid);

    pressure_ = std::make_shared<PressureLU>();
    const double ie2 = 1.0 / (eps * eps);
    auto assemble = [&](double xi) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ny, ny);
        P.block(1, 0, ni, ny) = ie2 * ops.D2.block(1, 0, ni, ny);
        for (int j = 1; j < ny - 1; ++j) P(j, j) -= xi * xi;
        P.row(0) = ops.D.row(0);        // dy p = data at the floor
        P.row(ny - 1) = ops.D.row(ny - 1);
        return P;
    };
    pressure_->by_mode.reserve(static_cast<size_t>(grid.nx / 2));
    for (int m = 1; m <= grid.nx / 2; ++m)
        pressure_->by_mode.emplace_back(assemble(grid.xi(m)));

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ny + 1, ny + 1);
    B.block(0, 0, ny, ny) = assemble(0.0);
    for (int j = 1; j < ny - 1; ++j) B(j, ny) = 1.0;  // multiplier feeds interior rows
    B.row(ny).head(ny) = ops.w.transpose();           // zero-mean gauge
    pressure_->gauge = Eigen::PartialPivLU<Eigen::MatrixXd>(B);
}

Field2D AnisoSolver::solve_pressure(const Field2D& rhs, const Field2D& neumann,
                                    double* multiplier) const {
    const int ny = grid_.ny;
    Field2D p(grid_);
    double worst_mu = 0.0;

    Eigen::VectorXd b(ny), x(ny);
    Eigen::VectorXd bg(ny + 1), xg(ny + 1);
    for (int k = 0; k < grid_.nx; ++k) {
        const int m = grid_.mode_of_slot(k);
        for (int part = 0; part < 2; ++part) {
            auto comp = [part](std::complex<double> z) { return part == 0 ? z.real() : z.imag(); };
            if (m == 0) {
                for (int j = 0; j < ny; ++j) bg(j) = comp(rhs.slot(k, j));
                bg(0) = comp(neumann.slot(k, 0));
                bg(ny - 1) = comp(neumann.slot(k, ny - 1));
                bg(ny) = 0.0;
                xg = pressure_->gauge.solve(bg);
                for (int j = 0; j < ny; ++j) {
                    auto& c = p.slot(k, j);
                    c = part == 0 ? std::complex<double>(xg(j), c.imag())
                                  : std::complex<double>(c.real(), xg(j));
                }
                worst_mu = std::max(worst_mu, std::abs(xg(ny)));
            } else {
                for (int j = 0; j < ny; ++j) b(j) = comp(rhs.slot(k, j));
                b(0) = comp(neumann.slot(k, 0));
                b(ny - 1) = comp(neumann.slot(k, ny - 1));
                x = pressure_->by_mode[static_cast<size_t>(std::abs(m) - 1)].solve(b);
                for (int j = 0; j < ny; ++j) {
                    auto& c = p.slot(k, j);
                    c = part == 0 ? std::complex<double>(x(j), c.imag())
                                  : std::complex<double>(c.real(), x(j));
                }
            }
        }
    }
    if (multiplier) *multiplier = worst_mu;
    return p;
}

AnisoRhsParts AnisoSolver::rhs(const AnisoState& state) const {
    const double ie2 = 1.0 / (eps_ * eps_);
    AnisoRhsParts parts;

    // A1, A2: everything except the pressure gradient.
    Field2D a1 = d2_dy2(state.u);
    a1 += (eps_ * eps_) * d_dx(d_dx(state.u));
    a1 -= state.ut;
    Field2D a2 = d2_dy2(state.v);
    a2 += (eps_ * eps_) * d_dx(d_dx(state.v));
    a2 -= state.vt;
    if (opts_.nonlinear) {
        parts.n1 = multiply(state.u, d_dx(state.u)) + multiply(state.v, d_dy(state.u));
        parts.n2 = multiply(state.u, d_dx(state.v)) + multiply(state.v, d_dy(state.v));
        a1 -= parts.n1;
        a2 -= parts.n2;
    } else {
        parts.n1 = Field2D(grid_);
        parts.n2 = Field2D(grid_);
    }

    // Divergence-free accelerations: (dx^2 + eps^-2 dy^2) p = dx A1 + dy A2,
    // dy p|walls = eps^2 A2|walls (so acc_v vanishes where v is pinned).
    const Field2D prhs = d_dx(a1) + d_dy(a2);
    Field2D neumann(grid_);
    const double e2 = eps_ * eps_;
    for (int k = 0; k < grid_.nx; ++k) {
        neumann.slot(k, 0) = e2 * a2.slot(k, 0);
        neumann.slot(k, grid_.ny - 1) = e2 * a2.slot(k, grid_.ny - 1);
    }
    parts.pressure = solve_pressure(prhs, neumann, &parts.compat_residual);

    parts.acc_u = a1 - d_dx(parts.pressure);
    Field2D dyp = d_dy(parts.pressure);
    dyp *= ie2;
    parts.acc_v = a2 - dyp;
    parts.div_acc = divergence_defect(parts.acc_u, parts.acc_v);
    return parts;
}

Field2D AnisoSolver::forcing_u(const AnisoRhsParts& parts) const {
    Field2D g = d_dx(parts.pressure);
    g += parts.n1;
    g *= -1.0;
    return g;
}

Field2D AnisoSolver::forcing_v(const AnisoRhsParts& parts) const {
    Field2D g = d_dy(parts.pressure);
    g *= 1.0 / (eps_ * eps_);
    g += parts.n2;
    g *= -1.0;
    return g;
}

void AnisoSolver::refresh(double dt) {
    if (dt == cached_dt_) return;
    const int ni = grid_.ny - 2;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ni, ni);
    lu_full_.clear();
    lu_half_.clear();
    lu_full_.reserve(static_cast<size_t>(grid_.nx / 2 + 1));
    lu_half_.reserve(static_cast<size_t>(grid_.nx / 2 + 1));
    for (int m = 0; m <= grid_.nx / 2; ++m) {
        const double xi = grid_.xi(m);
        const Eigen::MatrixXd L = Lint_base_ - (eps_ * eps_ * xi * xi) * I;
        auto make = [&](double h) {
            return Eigen::PartialPivLU<Eigen::MatrixXd>((1.0 + 0.5 * h) * I - 0.25 * h * h * L);
        };
        lu_full_.push_back(make(dt));
        lu_half_.push_back(make(0.5 * dt));
    }
    cached_dt_ = dt;
}

void AnisoSolver::cn_substep(Field2D& u, Field2D& ut, const Field2D& forcing, double dt,
                             bool half) const {
    using detail::Packed;
    const auto& lus = half ? lu_half_ : lu_full_;
    Packed U = detail::pack_interior(u);
    Packed W = detail::pack_interior(ut);
    const Packed G = detail::pack_interior(forcing);
    const int ni = grid_.ny - 2;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ni, ni);

    for (int k = 0; k < grid_.nx; ++k) {
        const int am = std::abs(grid_.mode_of_slot(k));
        const auto& lu = lus[static_cast<size_t>(am)];
        const double xi = grid_.xi(am);
        const double shift = eps_ * eps_ * xi * xi;
        auto advance = [&](Eigen::MatrixXd& Um, Eigen::MatrixXd& Wm, const Eigen::MatrixXd& Gm) {
            const Eigen::VectorXd b1 = Um.col(k) + (0.5 * dt) * Wm.col(k);
            const Eigen::VectorXd lt =
                Lint_base_ * (Um.col(k) + b1) - shift * (Um.col(k) + b1);
            const Eigen::VectorXd rhs =
                (1.0 - 0.5 * dt) * Wm.col(k) + (0.5 * dt) * lt + dt * Gm.col(k);
            Wm.col(k) = lu.solve(rhs);
            Um.col(k) = b1 + (0.5 * dt) * Wm.col(k);
        };
        advance(U.re, W.re, G.re);
        advance(U.im, W.im, G.im);
    }
    detail::unpack_interior(U, u);
    detail::unpack_interior(W, ut);
}

StepOutcome AnisoSolver::step(AnisoState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("AnisoSolver::step: dt must be positive");
    if (state.eps != eps_)
        throw std::invalid_argument("AnisoSolver::step: state.eps does not match the solver");
    const double cap = aniso_dt_max(state);
    if (dt > cap * (1.0 + 1e-12))
        throw std::invalid_argument("AnisoSolver::step: dt = " + std::to_string(dt) +
                                    " exceeds the step bound " + std::to_string(cap));
    refresh(dt);

    const bool clock_live = state.band.rate > 0.0;
    const double driver0 = clock_live ? tau_driver(state) : 0.0;

    const Profile mean_u0 = mean_y(state.u);
    const Profile mean_w0 = mean_y(state.ut);

    const AnisoRhsParts parts0 = rhs(state);
    const Field2D gu0 = forcing_u(parts0);
    const Field2D gv0 = forcing_v(parts0);

    AnisoState mid = state;
    cn_substep(mid.u, mid.ut, gu0, 0.5 * dt, /*half=*/true);
    cn_substep(mid.v, mid.vt, gv0, 0.5 * dt, /*half=*/true);
    project_column_means(mid.u, mid.ut, mean_u0, mean_w0, 0.5 * dt, bump_);
    mid.t = state.t + 0.5 * dt;
    mid.band.clock += 0.5 * dt * driver0;
    double driver_mid = driver0;
    if (clock_live && !mid.band.exhausted()) driver_mid = tau_driver(mid);

    const AnisoRhsParts parts_mid = rhs(mid);
    const Field2D gu = forcing_u(parts_mid);
    const Field2D gv = forcing_v(parts_mid);

    cn_substep(state.u, state.ut, gu, dt, /*half=*/false);
    cn_substep(state.v, state.vt, gv, dt, /*half=*/false);
    project_column_means(state.u, state.ut, mean_u0, mean_w0, dt, bump_);
    state.t += dt;
    step_clock(state.band, driver_mid, dt);
    ++step_count_;

    if (opts_.cleaning_interval > 0 && step_count_ % opts_.cleaning_interval == 0)
        state.v = recover_v(state.u, opts_.compat_tol);

    if (!state.u.finite() || !state.ut.finite() || !state.v.finite() || !state.vt.finite())
        throw BlowUpError(state.t,
                          "anisotropic solution lost finiteness at t = " + std::to_string(state.t));
    return state.band.exhausted() ? StepOutcome::BandExhausted : StepOutcome::Ok;
}

}  // namespace striplab
