#pragma once

#include <array>
#include <string>
#include <vector>

#include "striplab/aniso.hpp"
#include "striplab/catalog.hpp"
#include "striplab/hydro.hpp"

namespace striplab {

/// Pointwise differences between the eps-system state and the hydrostatic
/// one: r1 = u_eps - u, r2 = v_eps - v, with v and vt on the hydrostatic
/// side diagnosed through the incompressibility constraint.
struct RemainderFields {
    Field2D r1;
    Field2D r2;
    Field2D rt1;
    Field2D rt2;
};

/// Throws std::invalid_argument on grid or time-stamp mismatch.
RemainderFields remainder(const AnisoState& aniso, const HydroState& hydro,
                          double compat_tol = 1e-8);

/// Residuals of the remainder system evaluated algebraically from the two
/// solvers' accelerations: res_i = (left side of remainder equation i)
/// minus the forcing F^{i,eps} assembled from the same fields. Both vanish
/// identically up to roundoff when the solvers are consistent, so the
/// relative size certifies the discrete algebra rather than the time
/// discretization.
struct ForcingResidual {
    double res1_abs = 0.0;
    double res2_abs = 0.0;
    double f1_norm = 0.0;
    double f2_norm = 0.0;
    double res1_rel = 0.0;  ///< res1_abs / max(f1_norm, tiny)
    double res2_rel = 0.0;
};

ForcingResidual forcing_residual(const AnisoState& aniso, const AnisoSolver& solver,
                                 const HydroState& hydro, const HydroOptions& hydro_opts);

/// Instantaneous eta-clock rate: the pair norm ||(dy u_eps, eps dx u_eps)||
/// under the tau band plus ||dy u|| under the theta band, both at B^{1/2}.
double eta_clock_driver(const AnisoState& aniso, const HydroState& hydro);

struct PairedOptions {
    double eps = 0.1;
    double dt = 0.0;  ///< 0 -> 0.9 x the tighter of the two stability caps at t = 0
    double t_end = 1.0;
    double a = 0.4;      ///< analytic budget shared by all three bands
    double lambda = 2.0; ///< theta and tau rates
    double mu = 4.0;     ///< eta rate, must be >= lambda
    bool nonlinear = true;
    double compat_tol = 1e-8;
    int row_cadence = 1;  ///< record group norms every k steps
};

/// One paired run: the four eps-grouped remainder norms over time (under
/// the eta weight, B^{1/2}), their running sup-in-time combination, and the
/// eta-clock history. The terminal functional applies the a priori
/// estimate's coefficients (1/2, 1, eps, 1/2) to the sup totals.
struct RemainderRecord {
    double eps = 0.0;
    double dt = 0.0;
    bool failed = false;
    std::string failure;
    std::vector<double> times;
    std::vector<std::array<double, 4>> group_norms;  ///< instantaneous, eta-weighted
    std::array<double, 4> terminal_groups{};         ///< Chemin-Lerner sup totals
    double terminal_functional = 0.0;
    double eta_end = 0.0;
    double eta_budget = 0.0;  ///< a / (2 mu)
    std::vector<ClockSample> eta_history;
    ForcingResidual mid_residual;  ///< spot check near t_end / 2
};

/// Runs the eps-system and the hydrostatic system in lockstep on shared
/// well-prepared data (v components diagnosed from u0, u1) and accumulates
/// the remainder functional. Solver blow-up, any band exhaustion, or a
/// violated stability cap mark the record failed instead of throwing.
RemainderRecord run_paired(const GridSpec& grid, const InitialData& data,
                           const PairedOptions& opts);

/// Least-squares line through (log eps, log norm). Points with norm <= 0
/// are excluded; fewer than two usable points leaves the fit degenerate.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< rms of log-residuals
    bool degenerate = true;
    std::vector<double> pair_slopes;  ///< slope between consecutive points
};

LogLogFit fit_loglog(const std::vector<double>& eps, const std::vector<double>& norms);

struct SweepResult {
    std::vector<RemainderRecord> records;  ///< one per requested eps, in order
    std::vector<double> eps_ok;
    std::vector<double> norms_ok;
    LogLogFit fit;
    double mhat_min = 0.0;
    double mhat_max = 0.0;
    double mhat_variation = 0.0;  ///< (max - min) / min over eps_ok
    bool degenerate = false;
};

/// Paired runs over a strictly decreasing eps list (at least three values);
/// failed runs are excluded from the fit and flagged in their records.
/// Runs execute in parallel worker slots (workers = 0 picks the hardware
/// count) and are merged in eps order, so the result is deterministic.
SweepResult sweep(const GridSpec& grid, const InitialData& data, const PairedOptions& base,
                  const std::vector<double>& eps_list, int workers = 0);

/// Self-consistency gate: the same paired run on the given grid and on the
/// refined one (Nx, Ny-1 scaled by 3/2, dt halved); trustworthy when the
/// terminal functional moves by less than 10%.
struct RefinementGate {
    double coarse_norm = 0.0;
    double fine_norm = 0.0;
    double rel_change = 0.0;
    bool pass = false;
    bool failed_run = false;  ///< either level failed; gate not meaningful
    std::string failure;
};

RefinementGate refinement_gate(const GridSpec& grid, const CatalogRequest& datum,
                               const PairedOptions& opts);

}  // namespace striplab
