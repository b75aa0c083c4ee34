#include "striplab/energy.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace striplab {

double poincare_constant(const GridSpec& grid) {
    grid.validate();
    const int n = grid.ny;
    if (grid.vertical == VerticalScheme::FiniteDifference2) {
        // Smallest eigenvalue of the classic tridiagonal (-1, 2, -1)/h^2.
        const double h = 1.0 / (n - 1);
        return 2.0 * (1.0 - std::cos(M_PI * h)) / (h * h);
    }
    // Rayleigh quotient w^T (Df)^2 / w^T f^2 minimized over Dirichlet grid
    // functions: generalized symmetric eigenproblem on the interior block.
    const VerticalOps& ops = VerticalOps::get(grid);
    const int ni = n - 2;
    Eigen::MatrixXd DZ = ops.D.block(0, 1, n, ni);  // D restricted to interior columns
    Eigen::MatrixXd K = DZ.transpose() * ops.w.asDiagonal() * DZ;
    Eigen::MatrixXd M = ops.w.segment(1, ni).asDiagonal();
    K = 0.5 * (K + K.transpose().eval());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("poincare_constant: eigenvalue solve failed");
    return solver.eigenvalues()(0);
}

namespace {

void check_weight_cap(double a, const GridSpec& grid) {
    const double cap = a * grid.xi_max();
    if (cap > 300.0)
        throw std::invalid_argument(
            "smallness_check: exponent a*xi_max = " + std::to_string(cap) +
            " exceeds 300; weighted norms would overflow (shrink a or the grid)");
}

}  // namespace

SmallnessReport smallness_check(const Field2D& u0, const Field2D& u1, double a, double c0,
                                double c2) {
    if (!(u0.grid() == u1.grid()))
        throw std::invalid_argument("smallness_check: u0 and u1 live on different grids");
    if (!(a > 0.0)) throw std::invalid_argument("smallness_check: band width a must be positive");
    if (!(c0 > 0.0)) throw std::invalid_argument("smallness_check: c0 must be positive");
    check_weight_cap(a, u0.grid());

    SmallnessReport rep;
    rep.a = a;
    rep.c0 = c0;
    rep.c2 = c2 > 0.0 ? c2 : c0;

    const Field2D wpair = apply_weight_width(u0 + u1, a);
    const Field2D wdyu0 = apply_weight_width(d_dy(u0), a);
    const Field2D wu1 = apply_weight_width(u1, a);

    rep.norm_pair = besov_norm(wpair, 0.5);
    rep.norm_dyu0 = besov_norm(wdyu0, 0.5);
    rep.norm_u1 = besov_norm(wu1, 0.5);
    rep.sum = rep.norm_pair + rep.norm_dyu0 + rep.norm_u1;
    rep.threshold = c0 * a;
    rep.pass = rep.sum <= rep.threshold;

    rep.sum_heavy = besov_norm(wpair, 1.5) + besov_norm(wdyu0, 1.5) + besov_norm(wu1, 1.5);
    rep.threshold_self = rep.c2 * a / (2.0 + rep.sum_heavy);
    rep.pass_self = rep.sum <= rep.threshold_self;
    return rep;
}

std::string to_string(LedgerKind kind) {
    switch (kind) {
        case LedgerKind::Hydro: return "hydro";
        case LedgerKind::Aniso: return "aniso";
        case LedgerKind::Vorticity: return "vorticity";
    }
    return "?";
}

namespace {

std::string index_tag(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

}  // namespace

EnergyLedger::EnergyLedger(const GridSpec& grid, LedgerKind kind, EnergyLedgerOptions opts)
    : grid_(grid), kind_(kind), opts_(std::move(opts)) {
    grid_.validate();
    if (opts_.s_list.empty())
        throw std::invalid_argument("EnergyLedger: s_list must not be empty");
    if (!(opts_.lambda > 0.0)) throw std::invalid_argument("EnergyLedger: lambda must be positive");
    if (kind_ == LedgerKind::Aniso && !(opts_.eps > 0.0))
        throw std::invalid_argument("EnergyLedger: Aniso kind needs eps > 0");

    poincare_ = poincare_constant(grid_);
    const double r_cap = std::min(1.0 / 8.0, poincare_ / 8.0);
    R_ = opts_.R < 0.0 ? 0.9 * r_cap : opts_.R;
    if (!(R_ < r_cap))
        throw std::invalid_argument("EnergyLedger: weight rate R = " + std::to_string(R_) +
                                    " must stay below min(1/8, k/8) = " + std::to_string(r_cap));
    build_terms();

    header_ = {"t", "clock", "band_width", "driver"};
    for (double s : opts_.s_list)
        for (const Term& term : terms_) {
            header_.push_back("inst_" + term.name + "_s" + index_tag(s));
            header_.push_back("acc_" + term.name + "_s" + index_tag(s));
        }
    data_totals_.assign(opts_.s_list.size(), 0.0);
}

void EnergyLedger::build_terms() {
    const double lam = opts_.lambda;
    const double eps = opts_.eps;
    const double sqkl = std::sqrt(poincare_ * lam);
    const double sql = std::sqrt(lam);

    // group ids are interpreted by fold_hydro / fold_aniso.
    auto add = [&](std::string name, double coeff, TimeAggregate agg, bool in_estimate,
                   bool clockw, int group) {
        Term term{std::move(name), coeff, in_estimate, clockw, group, {}, {}};
        const double shift = clockw ? 0.5 : 0.0;
        for (double s : opts_.s_list) term.acc.emplace_back(s + shift, agg, grid_);
        term.last_inst.assign(opts_.s_list.size(), 0.0);
        terms_.push_back(std::move(term));
    };

    using TA = TimeAggregate;
    switch (kind_) {
        case LedgerKind::Hydro:
            add("sup_pair", 0.5, TA::SupInTime, true, false, 0);
            add("sup_dyu", 1.0, TA::SupInTime, true, false, 1);
            add("sup_ut", 0.5, TA::SupInTime, true, false, 2);
            add("l2_ut", 0.5, TA::L2InTime, true, false, 2);
            add("l2_dyu", 0.5, TA::L2InTime, true, false, 1);
            add("wl2_u", 0.5 * sqkl, TA::WeightedL2InTime, false, true, 3);
            add("wl2_ut", 0.5 * sql, TA::WeightedL2InTime, false, true, 2);
            add("wl2_dyu", 0.5 * sql, TA::WeightedL2InTime, false, true, 1);
            break;
        case LedgerKind::Vorticity:
            add("sup_dypair", 0.5, TA::SupInTime, true, false, 0);
            add("sup_dyut", 0.5, TA::SupInTime, true, false, 1);
            add("sup_d2yu", 1.0, TA::SupInTime, true, false, 2);
            add("l2_dyut", 0.5, TA::L2InTime, true, false, 1);
            add("l2_d2yu", 0.5, TA::L2InTime, true, false, 2);
            break;
        case LedgerKind::Aniso:
            add("sup_pair", 0.5, TA::SupInTime, true, false, 0);
            add("sup_dy", 1.0, TA::SupInTime, true, false, 1);
            add("sup_dx", eps, TA::SupInTime, true, false, 2);
            add("sup_t", 0.5, TA::SupInTime, true, false, 3);
            add("l2_t", 1.0, TA::L2InTime, true, false, 3);
            add("l2_dy", 1.0, TA::L2InTime, true, false, 1);
            add("l2_dx", eps, TA::L2InTime, true, false, 2);
            add("wl2_uv", sqkl, TA::WeightedL2InTime, false, true, 4);
            add("wl2_t", sql, TA::WeightedL2InTime, false, true, 3);
            add("wl2_dy", sql, TA::WeightedL2InTime, false, true, 1);
            add("wl2_dx", eps * sql, TA::WeightedL2InTime, false, true, 2);
            break;
    }
}

void EnergyLedger::require_kind(LedgerKind expected, const char* fn) const {
    if (kind_ != expected &&
        !(expected == LedgerKind::Hydro && kind_ == LedgerKind::Vorticity))
        throw std::invalid_argument(std::string("EnergyLedger::") + fn + ": ledger kind is " +
                                    to_string(kind_) + ", wrong state type");
}

void EnergyLedger::append_row(double t, double clock, double width, double driver) {
    std::vector<double> row;
    row.reserve(header_.size());
    row.push_back(t);
    row.push_back(clock);
    row.push_back(width);
    row.push_back(driver);
    for (size_t si = 0; si < opts_.s_list.size(); ++si)
        for (const Term& term : terms_) {
            row.push_back(term.last_inst[si]);
            row.push_back(term.coeff * term.acc[si].total());
        }
    rows_.push_back(std::move(row));
}

void EnergyLedger::fold_hydro(const HydroState& state, double dt, bool seed_only) {
    const double wr = std::exp(R_ * state.t);
    auto weigh = [&](const Field2D& f) {
        Field2D g = opts_.apply_band_weight ? apply_weight(f, state.band) : f;
        g *= wr;
        return g;
    };

    // Groupings: hydro tracks u-level fields, vorticity their dy/dy^2 lifts.
    std::vector<Field2D> fields;
    if (kind_ == LedgerKind::Hydro) {
        fields.push_back(weigh(state.u + state.ut));  // 0
        fields.push_back(weigh(d_dy(state.u)));       // 1
        fields.push_back(weigh(state.ut));            // 2
        fields.push_back(weigh(state.u));             // 3
    } else {
        const Field2D dyu = d_dy(state.u);
        const Field2D dyut = d_dy(state.ut);
        fields.push_back(weigh(dyu + dyut));       // 0
        fields.push_back(weigh(dyut));             // 1
        fields.push_back(weigh(d2_dy2(state.u)));  // 2
    }
    const double driver = theta_driver(state);

    for (Term& term : terms_)
        for (size_t si = 0; si < opts_.s_list.size(); ++si) {
            const Field2D& f = fields[static_cast<size_t>(term.group)];
            term.acc[si].update(f, state.t, dt, term.clock_weighted ? driver : 1.0);
            term.last_inst[si] = besov_norm(f, term.acc[si].s());
        }

    if (seed_only) {
        // Data norms at full width a: right side of the monitored estimate.
        auto wa = [&](const Field2D& f) { return apply_weight_width(f, state.band.a); };
        for (size_t si = 0; si < opts_.s_list.size(); ++si) {
            const double s = opts_.s_list[si];
            double total = 0.0;
            if (kind_ == LedgerKind::Hydro) {
                total = besov_norm(wa(d_dy(state.u)), s) + besov_norm(wa(state.u + state.ut), s) +
                        besov_norm(wa(state.ut), s);
            } else {
                total = besov_norm(wa(d2_dy2(state.u)), s) +
                        besov_norm(wa(d_dy(state.u + state.ut)), s) +
                        besov_norm(wa(d_dy(state.ut)), s) + besov_norm(wa(state.u), s + 2.0) +
                        besov_norm(wa(state.u), s + 1.0) + besov_norm(wa(state.ut), s + 1.0);
            }
            data_totals_[si] = total;
        }
    }
    append_row(state.t, state.band.clock, state.band.band_width(), driver);
}

void EnergyLedger::fold_aniso(const AnisoState& state, double dt, bool seed_only) {
    if (std::abs(state.eps - opts_.eps) > 1e-14 * std::max(1.0, opts_.eps))
        throw std::invalid_argument("EnergyLedger: state eps " + std::to_string(state.eps) +
                                    " does not match ledger eps " + std::to_string(opts_.eps));
    const double eps = opts_.eps;
    const double wr = std::exp(R_ * state.t);
    auto weigh = [&](const Field2D& f) {
        Field2D g = opts_.apply_band_weight ? apply_weight(f, state.band) : f;
        g *= wr;
        return g;
    };

    // Pair groupings (f, eps-scaled g) of the eps-system estimate.
    std::vector<std::pair<Field2D, Field2D>> pairs;
    pairs.emplace_back(weigh(state.u + state.ut), eps * weigh(state.v + state.vt));  // 0
    pairs.emplace_back(weigh(d_dy(state.u)), eps * weigh(d_dy(state.v)));            // 1
    pairs.emplace_back(weigh(d_dx(state.u)), eps * weigh(d_dx(state.v)));            // 2
    pairs.emplace_back(weigh(state.ut), eps * weigh(state.vt));                      // 3
    pairs.emplace_back(weigh(state.u), eps * weigh(state.v));                        // 4
    const double driver = tau_driver(state);

    for (Term& term : terms_)
        for (size_t si = 0; si < opts_.s_list.size(); ++si) {
            const auto& [f, g] = pairs[static_cast<size_t>(term.group)];
            term.acc[si].update(f, g, state.t, dt, term.clock_weighted ? driver : 1.0);
            term.last_inst[si] = besov_norm_pair(f, g, term.acc[si].s());
        }

    if (seed_only) {
        auto wa = [&](const Field2D& f) { return apply_weight_width(f, state.band.a); };
        for (size_t si = 0; si < opts_.s_list.size(); ++si) {
            const double s = opts_.s_list[si];
            data_totals_[si] =
                besov_norm_pair(wa(d_dy(state.u)), eps * wa(d_dy(state.v)), s) +
                eps * besov_norm_pair(wa(d_dx(state.u)), eps * wa(d_dx(state.v)), s) +
                besov_norm_pair(wa(state.ut), eps * wa(state.vt), s) +
                besov_norm_pair(wa(state.u + state.ut), eps * wa(state.v + state.vt), s);
        }
    }
    append_row(state.t, state.band.clock, state.band.band_width(), driver);
}

void EnergyLedger::set_initial(const HydroState& state) {
    require_kind(LedgerKind::Hydro, "set_initial");
    if (initialized_) throw std::logic_error("EnergyLedger::set_initial: already initialized");
    fold_hydro(state, 0.0, true);
    initialized_ = true;
}

void EnergyLedger::set_initial(const AnisoState& state) {
    require_kind(LedgerKind::Aniso, "set_initial");
    if (initialized_) throw std::logic_error("EnergyLedger::set_initial: already initialized");
    fold_aniso(state, 0.0, true);
    initialized_ = true;
}

void EnergyLedger::track(const HydroState& state, double dt) {
    require_kind(LedgerKind::Hydro, "track");
    if (!initialized_) throw std::logic_error("EnergyLedger::track: set_initial first");
    if (!(dt > 0.0)) throw std::invalid_argument("EnergyLedger::track: dt must be positive");
    fold_hydro(state, dt, false);
}

void EnergyLedger::track(const AnisoState& state, double dt) {
    require_kind(LedgerKind::Aniso, "track");
    if (!initialized_) throw std::logic_error("EnergyLedger::track: set_initial first");
    if (!(dt > 0.0)) throw std::invalid_argument("EnergyLedger::track: dt must be positive");
    fold_aniso(state, dt, false);
}

void EnergyLedger::finish(const HydroState& state) {
    require_kind(LedgerKind::Hydro, "finish");
    if (!initialized_) throw std::logic_error("EnergyLedger::finish: set_initial first");
    fold_hydro(state, 0.0, false);
}

void EnergyLedger::finish(const AnisoState& state) {
    require_kind(LedgerKind::Aniso, "finish");
    if (!initialized_) throw std::logic_error("EnergyLedger::finish: set_initial first");
    fold_aniso(state, 0.0, false);
}

void EnergyLedger::log_event(const std::string& what) { events_.push_back(what); }

LedgerReport EnergyLedger::report() const {
    LedgerReport rep;
    rep.kind = kind_;
    rep.R = R_;
    rep.lambda = opts_.lambda;
    rep.poincare = poincare_;
    rep.events = events_;
    for (size_t si = 0; si < opts_.s_list.size(); ++si) {
        LedgerReport::PerIndex per;
        per.s = opts_.s_list[si];
        per.data_total = data_totals_[si];
        for (const Term& term : terms_) {
            LedgerTermView view;
            view.name = term.name;
            view.coeff = term.coeff;
            view.aggregate = term.acc[si].aggregate();
            view.in_estimate = term.in_estimate;
            view.accumulated = term.coeff * term.acc[si].total();
            view.instantaneous = term.last_inst[si];
            (view.in_estimate ? per.lhs_total : per.extra_total) += view.accumulated;
            per.terms.push_back(std::move(view));
        }
        per.ratio = per.data_total > 0.0 ? per.lhs_total / per.data_total : 0.0;
        rep.per_s.push_back(std::move(per));
    }
    return rep;
}

}  // namespace striplab
