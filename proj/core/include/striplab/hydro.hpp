#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "striplab/band.hpp"
#include "striplab/field.hpp"
#include "striplab/spectral.hpp"

namespace striplab {

/// Thrown when a solution leaves the representable range (NaN/Inf).
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double t, const std::string& what) : std::runtime_error(what), t_(t) {}
    double blow_up_time() const { return t_; }

private:
    double t_;
};

/// Outcome of one time step. Band exhaustion is an expected event (the
/// analytic-band machinery stops being meaningful), not a failure.
enum class StepOutcome { Ok, BandExhausted };

/// State of the damped hydrostatic wave system on the strip: the horizontal
/// velocity u, its time derivative, and the shrinking-band clock driven by
/// ||dy u||_{B^{1/2}} under the weight.
struct HydroState {
    Field2D u;
    Field2D ut;
    double t = 0.0;
    AnalyticBandState band;
};

struct HydroOptions {
    bool nonlinear = true;      ///< advective terms and pressure feedback
    double compat_tol = 1e-8;   ///< tolerated vertical-mean defect in recover_v
};

/// Pieces of the semi-discrete acceleration, exposed for monitors and for
/// the model-comparison module.
struct HydroRhsParts {
    Field2D acc;        ///< d(ut)/dt including pressure
    Field2D v;          ///< vertical velocity recovered from u
    Field2D nonlinear;  ///< u dx u + v dy u
    Profile dxp;        ///< horizontal pressure gradient (y-independent)
};

/// Vertical velocity v = -int_0^y dx u dy'. Requires the vertical mean of u
/// to vanish on every mode that survives d/dx (that is what makes v(1) = 0;
/// the x-mean column never enters v). A violation beyond tol throws
/// std::invalid_argument.
Field2D recover_v(const Field2D& u, double tol = 1e-8);

/// Hydrostatic pressure gradient profile: mode-wise
///   dxp = dy u|_{y=1} - dy u|_{y=0} - d/dx int_0^1 u^2 dy,
/// the unique y-independent gradient keeping the vertical mean of the
/// acceleration equal to -mean(ut). Its x-mean component is the flux-fixing
/// constant gradient.
Profile pressure_gradient(const Field2D& u);

/// Semi-discrete right-hand side: acc = -ut - N + dy^2 u - dxp, with
/// mean_y(acc) = -mean_y(ut) mode-wise by construction.
HydroRhsParts hydro_rhs(const HydroState& state, const HydroOptions& opts = {});

/// Advective step-size bound 0.25 * min(dx / max|u|, 1).
double hydro_dt_max(const Field2D& u);

/// Remove the vertical-mean defect by subtracting mean_y(u) times a fixed
/// Dirichlet bump with unit discrete mass. Idempotent, preserves wall zeros.
Field2D enforce_compatibility(const Field2D& u);

/// Crank-Nicolson core with midpoint-frozen forcing (one step is: freeze
/// forcing, half CN step, refreeze at the midpoint state, full CN step).
/// The damped linear part is treated implicitly; one LU factorization per
/// (dt, grid) is reused across modes since the vertical operator does not
/// depend on the mode.
class HydroStepper {
public:
    explicit HydroStepper(const GridSpec& grid, HydroOptions opts = {});

    /// Advance by dt (must satisfy dt <= hydro_dt_max). Updates the theta
    /// clock with the midpoint driver and re-asserts the exact column-mean
    /// law after each substep so states stay compatible. Throws BlowUpError
    /// on NaN/Inf; returns BandExhausted when the analytic band closes
    /// during the step.
    StepOutcome step(HydroState& state, double dt);

    const GridSpec& grid() const { return grid_; }
    const HydroOptions& options() const { return opts_; }

private:
    void refresh(double dt);
    void cn_substep(Field2D& u, Field2D& ut, const Field2D& forcing, double dt,
                    const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) const;

    GridSpec grid_;
    HydroOptions opts_;
    double cached_dt_ = -1.0;
    Eigen::MatrixXd Lint_;   ///< interior dy^2 block
    Eigen::VectorXd bump_;   ///< unit-mass corrector for the mean projection
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_full_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_half_;
};

/// Theta-clock driver ||dy u||_{B^{1/2}} under the current band weight.
double theta_driver(const HydroState& state);

}  // namespace striplab
