#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "striplab/band.hpp"
#include "striplab/field.hpp"
#include "striplab/hydro.hpp"

namespace striplab {

/// State of the anisotropically scaled wave-relaxed system at thickness eps:
/// both velocity components are prognostic, with the tau clock driving the
/// shared analytic band.
struct AnisoState {
    Field2D u;
    Field2D ut;
    Field2D v;
    Field2D vt;
    double t = 0.0;
    double eps = 0.1;
    AnalyticBandState band;
};

struct AnisoOptions {
    bool nonlinear = true;
    int cleaning_interval = 1;  ///< reset v from u every k steps; 0 disables
    double compat_tol = 1e-8;
};

/// Acceleration decomposition exposed for monitors and model comparison.
struct AnisoRhsParts {
    Field2D acc_u;          ///< includes -dx p
    Field2D acc_v;          ///< includes -eps^-2 dy p
    Field2D pressure;       ///< p itself (defined up to the xi=0 gauge)
    Field2D n1;             ///< u dx u + v dy u
    Field2D n2;             ///< u dx v + v dy v
    double compat_residual = 0.0;  ///< |Lagrange multiplier| of the xi=0 solve
    double div_acc = 0.0;          ///< interior L2 of div(acc_u, acc_v)
};

/// Quadratic energy of the linearized system,
///   1/2 ||ut||^2 + eps^2/2 ||vt||^2 + 1/2 ||dy u||^2 + eps^2/2 ||dy v||^2
///   + eps^2/2 ||dx u||^2 + eps^4/2 ||dx v||^2,
/// nonincreasing along linear dynamics.
double eps_energy(const AnisoState& state);

/// Interior L2 norm of dx u + dy v.
double divergence_defect(const Field2D& u, const Field2D& v);

/// Step bound: min of the advective bound for u and the pressure-wave bound
/// 0.5 * eps / xi_max.
double aniso_dt_max(const AnisoState& state);

/// Well-prepared initial state: v and vt recovered from u0, u1 by the
/// hydrostatic constraint.
AnisoState prepare_initial(const Field2D& u0, const Field2D& u1, double eps,
                           const AnalyticBandState& band);

/// Solver bound to one (grid, eps): owns the per-mode pressure
/// factorizations and the per-(mode, dt) wave factorizations.
class AnisoSolver {
public:
    AnisoSolver(const GridSpec& grid, double eps, AnisoOptions opts = {});

    /// Full acceleration with the pressure determined by the divergence-free
    /// condition on accelerations; Neumann data comes from the v-momentum
    /// trace on the walls and the xi=0 column is gauged to zero vertical
    /// mean through a bordered solve whose multiplier is reported.
    AnisoRhsParts rhs(const AnisoState& state) const;

    /// Crank-Nicolson midpoint step (same scheme as the hydrostatic
    /// stepper), re-asserting the conserved column means of u after each
    /// substep, followed by the cleaning reset when due. Updates the tau
    /// clock. Throws BlowUpError on NaN/Inf, returns BandExhausted when the
    /// band closes.
    StepOutcome step(AnisoState& state, double dt);

    const GridSpec& grid() const { return grid_; }
    double eps() const { return eps_; }
    const AnisoOptions& options() const { return opts_; }

private:
    struct PressureLU;

    void refresh(double dt);
    Field2D solve_pressure(const Field2D& rhs, const Field2D& neumann, double* multiplier) const;
    void cn_substep(Field2D& u, Field2D& ut, const Field2D& forcing, double dt, bool half) const;
    Field2D forcing_u(const AnisoRhsParts& parts) const;
    Field2D forcing_v(const AnisoRhsParts& parts) const;

    GridSpec grid_;
    double eps_;
    AnisoOptions opts_;
    std::shared_ptr<PressureLU> pressure_;  ///< per-|m| factorizations
    Eigen::MatrixXd Lint_base_;             ///< interior dy^2 block
    Eigen::VectorXd bump_;                  ///< unit-mass mean corrector
    double cached_dt_ = -1.0;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_full_;  ///< per |m|
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_half_;
    long step_count_ = 0;
};

/// Tau-clock driver ||dy u||_{B^{1/2}} + eps ||dy v||_{B^{1/2}} under the
/// current band weight.
double tau_driver(const AnisoState& state);

}  // namespace striplab
