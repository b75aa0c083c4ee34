#include "striplab/runner.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "striplab/aniso.hpp"
#include "striplab/band.hpp"
#include "striplab/besov.hpp"
#include "striplab/catalog.hpp"
#include "striplab/convergence.hpp"
#include "striplab/cutoff.hpp"
#include "striplab/energy.hpp"
#include "striplab/hydro.hpp"
#include "striplab/io.hpp"
#include "striplab/spectral.hpp"

namespace striplab {
namespace {

using ordered_json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string zero_pad(long v, int width) {
    std::ostringstream s;
    s << std::setw(width) << std::setfill('0') << v;
    return s.str();
}

// Funnels every byte of a run directory through one place (all writes happen
// on the orchestrating thread) and records content hashes for the manifest.
class OutputSink {
public:
    explicit OutputSink(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& bytes) {
        io::write_file(dir_ + "/" + name, bytes);
        entries_.push_back({name, io::sha256_hex(bytes), bytes.size()});
    }

    /// Writes manifest.json (every prior file with its sha256) and then
    /// timings.txt, which stays out of the hashed list: its bytes change
    /// between reruns by nature, everything else is byte-reproducible.
    void finalize(const std::string& command, const RunConfig& config,
                  const std::vector<std::pair<std::string, double>>& timings) {
        ordered_json m;
        m["version"] = io::kVersionString;
        m["command"] = command;
        m["config"] = serialize_config(config);
        ordered_json outs = ordered_json::array();
        for (const Entry& e : entries_)
            outs.push_back(ordered_json{{"file", e.name}, {"sha256", e.sha}, {"bytes", e.bytes}});
        m["outputs"] = std::move(outs);
        m["unhashed"] = ordered_json::array(
            {ordered_json{{"file", "timings.txt"},
                          {"reason", "wall-clock timings differ between reruns"}}});
        io::write_file(dir_ + "/manifest.json", m.dump(2) + "\n");

        std::ostringstream t;
        for (const auto& [phase, sec] : timings) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3f", sec);
            t << phase << " " << buf << "\n";
        }
        io::write_file(dir_ + "/timings.txt", t.str());
    }

    std::vector<std::string> files() const {
        std::vector<std::string> out;
        for (const Entry& e : entries_) out.push_back(e.name);
        out.push_back("manifest.json");
        out.push_back("timings.txt");
        return out;
    }

private:
    struct Entry {
        std::string name;
        std::string sha;
        std::size_t bytes;
    };

    std::string dir_;
    std::vector<Entry> entries_;
};

const char* aggregate_name(TimeAggregate a) {
    switch (a) {
        case TimeAggregate::SupInTime: return "sup";
        case TimeAggregate::L2InTime: return "l2";
        case TimeAggregate::WeightedL2InTime: return "weighted_l2";
    }
    return "?";
}

ordered_json ledger_json(const LedgerReport& r) {
    ordered_json j;
    j["kind"] = to_string(r.kind);
    j["R"] = r.R;
    j["lambda"] = r.lambda;
    j["poincare"] = r.poincare;
    ordered_json per = ordered_json::array();
    for (const LedgerReport::PerIndex& p : r.per_s) {
        ordered_json terms = ordered_json::array();
        for (const LedgerTermView& t : p.terms)
            terms.push_back(ordered_json{{"name", t.name},
                                         {"coeff", t.coeff},
                                         {"aggregate", aggregate_name(t.aggregate)},
                                         {"in_estimate", t.in_estimate},
                                         {"accumulated", t.accumulated},
                                         {"instantaneous", t.instantaneous}});
        per.push_back(ordered_json{{"s", p.s},
                                   {"lhs_total", p.lhs_total},
                                   {"extra_total", p.extra_total},
                                   {"data_total", p.data_total},
                                   {"ratio", p.ratio},
                                   {"terms", std::move(terms)}});
    }
    j["per_s"] = std::move(per);
    j["events"] = r.events;
    return j;
}

ordered_json smallness_json(const SmallnessReport& s) {
    return ordered_json{{"norm_pair", s.norm_pair}, {"norm_dyu0", s.norm_dyu0},
                        {"norm_u1", s.norm_u1},     {"sum", s.sum},
                        {"threshold", s.threshold}, {"pass", s.pass},
                        {"sum_heavy", s.sum_heavy}, {"threshold_self", s.threshold_self},
                        {"pass_self", s.pass_self}, {"a", s.a},
                        {"c0", s.c0},               {"c2", s.c2}};
}

ordered_json residual_json(const ForcingResidual& r) {
    return ordered_json{{"res1_abs", r.res1_abs}, {"res2_abs", r.res2_abs},
                        {"f1_norm", r.f1_norm},   {"f2_norm", r.f2_norm},
                        {"res1_rel", r.res1_rel}, {"res2_rel", r.res2_rel}};
}

std::string snapshot_csv(const Field2D& f) {
    const GridSpec& g = f.grid();
    const VerticalOps& ops = VerticalOps::get(g);
    std::vector<std::string> header{"y"};
    for (int i = 0; i < g.nx; ++i) header.push_back("x" + std::to_string(i));
    io::CsvWriter csv(header);
    const std::vector<double> vals = inverse_transform(f);
    for (int j = 0; j < g.ny; ++j) {
        std::vector<double> row{ops.y(j)};
        for (int i = 0; i < g.nx; ++i)
            row.push_back(vals[static_cast<size_t>(i) * static_cast<size_t>(g.ny) + j]);
        csv.add_row(row);
    }
    return csv.str();
}

void write_ledgers(OutputSink& sink, std::vector<EnergyLedger>& ledgers,
                   const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
        io::CsvWriter csv(ledgers[i].csv_header());
        for (const std::vector<double>& row : ledgers[i].csv_rows()) csv.add_row(row);
        sink.write("ledger_" + names[i] + ".csv", csv.str());
    }
}

// Steps planned so the final time lands exactly on t_end.
std::pair<double, long> plan_steps(double requested_dt, double default_dt, double t_end) {
    double dt = requested_dt > 0.0 ? requested_dt : default_dt;
    long steps = std::lround(std::ceil(t_end / dt - 1e-12));
    if (steps < 1) steps = 1;
    return {t_end / static_cast<double>(steps), steps};
}

EnergyLedgerOptions ledger_options(const RunConfig& cfg) {
    EnergyLedgerOptions o;
    o.s_list = cfg.monitor_s;
    o.R = cfg.R;
    o.lambda = cfg.lambda;
    o.eps = cfg.eps;
    return o;
}

RunOutcome simulate_hydro(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec grid = cfg.grid;
    const InitialData data = make_datum(grid, cfg.data);

    HydroState state;
    state.u = data.u0;
    state.ut = data.u1;
    state.band = make_band(cfg.a, cfg.lambda, ClockKind::Theta, grid);

    HydroOptions hopts;
    hopts.nonlinear = cfg.nonlinear;
    HydroStepper stepper(grid, hopts);

    std::vector<EnergyLedger> ledgers;
    std::vector<std::string> ledger_names;
    for (const std::string& m : cfg.monitors) {
        if (std::find(ledger_names.begin(), ledger_names.end(), m) != ledger_names.end())
            continue;
        if (m == "hydro") ledgers.emplace_back(grid, LedgerKind::Hydro, ledger_options(cfg));
        else if (m == "vorticity")
            ledgers.emplace_back(grid, LedgerKind::Vorticity, ledger_options(cfg));
        else
            continue;
        ledger_names.push_back(m);
    }
    for (EnergyLedger& L : ledgers) L.set_initial(state);

    const SmallnessReport small = smallness_check(data.u0, data.u1, cfg.a, 1.0);
    const auto [dt, steps] = plan_steps(cfg.dt, 0.9 * hydro_dt_max(state.u), cfg.t_end);

    OutputSink sink(cfg.directory);
    io::CsvWriter diag({"t", "flux_drift", "l2_u", "l2_ut", "driver", "band_width"});
    const Profile mean0 = mean_y(state.u);
    auto flux_drift = [&mean0](const Field2D& u) {
        const Profile m = mean_y(u);
        double d = 0.0;
        for (Eigen::Index k = 0; k < m.size(); ++k) d = std::max(d, std::abs(m(k) - mean0(k)));
        return d;
    };

    if (cfg.snapshot_every > 0) sink.write("snapshot_u_000000.csv", snapshot_csv(state.u));

    int code = 0;
    std::string msg;
    long done = 0;
    double flux_drift_max = 0.0;
    try {
        for (long i = 0; i < steps; ++i) {
            const double cap = hydro_dt_max(state.u);
            if (dt > cap * (1.0 + 1e-12)) {
                code = 3;
                msg = "stability cap crossed at t = " + std::to_string(state.t) + " (dt = " +
                      std::to_string(dt) + ", cap = " + std::to_string(cap) + ")";
                break;
            }
            const double driver = theta_driver(state);
            for (EnergyLedger& L : ledgers) L.track(state, dt);
            if (i % cfg.row_every == 0)
                diag.add_row({state.t, flux_drift(state.u), l2_norm(state.u), l2_norm(state.ut),
                              driver, state.band.band_width()});
            flux_drift_max = std::max(flux_drift_max, flux_drift(state.u));
            const StepOutcome out = stepper.step(state, dt);
            ++done;
            if (out == StepOutcome::BandExhausted) {
                code = 4;
                msg = "theta band exhausted at t = " + std::to_string(state.t);
                break;
            }
            if (cfg.snapshot_every > 0 && (i + 1) % cfg.snapshot_every == 0)
                sink.write("snapshot_u_" + zero_pad(i + 1, 6) + ".csv", snapshot_csv(state.u));
        }
    } catch (const BlowUpError& e) {
        code = 3;
        msg = e.what();
    } catch (const BandExhaustedError& e) {
        code = 4;
        msg = e.what();
    }

    if (code == 0) {
        for (EnergyLedger& L : ledgers) L.finish(state);
        flux_drift_max = std::max(flux_drift_max, flux_drift(state.u));
        diag.add_row({state.t, flux_drift(state.u), l2_norm(state.u), l2_norm(state.ut),
                      theta_driver(state), state.band.band_width()});
        std::ostringstream s;
        s << "ok: t = " << state.t << ", theta = " << state.band.clock << ", band width "
          << state.band.band_width();
        msg = s.str();
    } else {
        for (EnergyLedger& L : ledgers) L.log_event(msg);
    }

    write_ledgers(sink, ledgers, ledger_names);
    sink.write("diag.csv", diag.str());

    const double budget = cfg.a / (2.0 * cfg.lambda);
    ordered_json rep;
    rep["version"] = io::kVersionString;
    rep["system"] = cfg.system;
    rep["exit_code"] = code;
    rep["message"] = msg;
    rep["t_end"] = cfg.t_end;
    rep["t_reached"] = state.t;
    rep["steps_planned"] = steps;
    rep["steps_taken"] = done;
    rep["dt"] = dt;
    rep["theta_end"] = state.band.clock;
    rep["band_width_end"] = state.band.band_width();
    rep["theta_budget"] = budget;
    rep["theta_within_budget"] = state.band.clock < budget;
    rep["flux_drift_max"] = flux_drift_max;
    rep["smallness"] = smallness_json(small);
    ordered_json lj = ordered_json::array();
    for (EnergyLedger& L : ledgers) lj.push_back(ledger_json(L.report()));
    rep["ledgers"] = std::move(lj);
    sink.write("report.json", rep.dump(2) + "\n");
    sink.write("config.toml", serialize_config(cfg));
    sink.finalize("simulate", cfg, {{"total", seconds_since(t0)}});
    return {code, msg, sink.files()};
}

RunOutcome simulate_aniso(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec grid = cfg.grid;
    const InitialData data = make_datum(grid, cfg.data);

    AnisoState state = prepare_initial(data.u0, data.u1, cfg.eps,
                                       make_band(cfg.a, cfg.lambda, ClockKind::Tau, grid));
    AnisoOptions aopts;
    aopts.nonlinear = cfg.nonlinear;
    AnisoSolver solver(grid, cfg.eps, aopts);

    std::vector<EnergyLedger> ledgers;
    std::vector<std::string> ledger_names;
    for (const std::string& m : cfg.monitors) {
        if (m != "aniso" ||
            std::find(ledger_names.begin(), ledger_names.end(), m) != ledger_names.end())
            continue;
        ledgers.emplace_back(grid, LedgerKind::Aniso, ledger_options(cfg));
        ledger_names.push_back(m);
    }
    for (EnergyLedger& L : ledgers) L.set_initial(state);

    const auto [dt, steps] = plan_steps(cfg.dt, 0.9 * aniso_dt_max(state), cfg.t_end);

    OutputSink sink(cfg.directory);
    io::CsvWriter diag({"t", "div_defect", "eps_energy", "l2_u", "l2_ut", "driver", "band_width"});
    const double div0 = divergence_defect(state.u, state.v);
    double div_drift_max = 0.0;
    double energy_prev = eps_energy(state);
    const double energy_initial = energy_prev;
    double energy_max_increment = 0.0;

    if (cfg.snapshot_every > 0) {
        sink.write("snapshot_u_000000.csv", snapshot_csv(state.u));
        sink.write("snapshot_v_000000.csv", snapshot_csv(state.v));
    }

    int code = 0;
    std::string msg;
    long done = 0;
    try {
        for (long i = 0; i < steps; ++i) {
            const double cap = aniso_dt_max(state);
            if (dt > cap * (1.0 + 1e-12)) {
                code = 3;
                msg = "stability cap crossed at t = " + std::to_string(state.t) + " (dt = " +
                      std::to_string(dt) + ", cap = " + std::to_string(cap) + ")";
                break;
            }
            const double driver = tau_driver(state);
            for (EnergyLedger& L : ledgers) L.track(state, dt);
            const double div = divergence_defect(state.u, state.v);
            div_drift_max = std::max(div_drift_max, std::abs(div - div0));
            if (i % cfg.row_every == 0)
                diag.add_row({state.t, div, energy_prev, l2_norm(state.u), l2_norm(state.ut),
                              driver, state.band.band_width()});
            const StepOutcome out = solver.step(state, dt);
            ++done;
            const double energy_now = eps_energy(state);
            energy_max_increment = std::max(energy_max_increment, energy_now - energy_prev);
            energy_prev = energy_now;
            if (out == StepOutcome::BandExhausted) {
                code = 4;
                msg = "tau band exhausted at t = " + std::to_string(state.t);
                break;
            }
            if (cfg.snapshot_every > 0 && (i + 1) % cfg.snapshot_every == 0) {
                sink.write("snapshot_u_" + zero_pad(i + 1, 6) + ".csv", snapshot_csv(state.u));
                sink.write("snapshot_v_" + zero_pad(i + 1, 6) + ".csv", snapshot_csv(state.v));
            }
        }
    } catch (const BlowUpError& e) {
        code = 3;
        msg = e.what();
    } catch (const BandExhaustedError& e) {
        code = 4;
        msg = e.what();
    }

    const double div_end = divergence_defect(state.u, state.v);
    if (code == 0) {
        for (EnergyLedger& L : ledgers) L.finish(state);
        div_drift_max = std::max(div_drift_max, std::abs(div_end - div0));
        diag.add_row({state.t, div_end, energy_prev, l2_norm(state.u), l2_norm(state.ut),
                      tau_driver(state), state.band.band_width()});
        std::ostringstream s;
        s << "ok: t = " << state.t << ", tau = " << state.band.clock << ", div drift "
          << div_drift_max;
        msg = s.str();
    } else {
        for (EnergyLedger& L : ledgers) L.log_event(msg);
    }

    write_ledgers(sink, ledgers, ledger_names);
    sink.write("diag.csv", diag.str());

    const double budget = cfg.a / (2.0 * cfg.lambda);
    ordered_json rep;
    rep["version"] = io::kVersionString;
    rep["system"] = cfg.system;
    rep["exit_code"] = code;
    rep["message"] = msg;
    rep["t_end"] = cfg.t_end;
    rep["t_reached"] = state.t;
    rep["steps_planned"] = steps;
    rep["steps_taken"] = done;
    rep["dt"] = dt;
    rep["eps"] = cfg.eps;
    rep["tau_end"] = state.band.clock;
    rep["band_width_end"] = state.band.band_width();
    rep["tau_budget"] = budget;
    rep["tau_within_budget"] = state.band.clock < budget;
    rep["div_defect_initial"] = div0;
    rep["div_defect_end"] = div_end;
    rep["div_drift_max"] = div_drift_max;
    rep["eps_energy_initial"] = energy_initial;
    rep["eps_energy_end"] = energy_prev;
    rep["eps_energy_max_increment"] = energy_max_increment;
    ordered_json lj = ordered_json::array();
    for (EnergyLedger& L : ledgers) lj.push_back(ledger_json(L.report()));
    rep["ledgers"] = std::move(lj);
    sink.write("report.json", rep.dump(2) + "\n");
    sink.write("config.toml", serialize_config(cfg));
    sink.finalize("simulate", cfg, {{"total", seconds_since(t0)}});
    return {code, msg, sink.files()};
}

PairedOptions paired_options(const RunConfig& cfg) {
    PairedOptions p;
    p.eps = cfg.eps;
    p.dt = cfg.dt;
    p.t_end = cfg.t_end;
    p.a = cfg.a;
    p.lambda = cfg.lambda;
    p.mu = cfg.mu;
    p.nonlinear = cfg.nonlinear;
    p.row_cadence = cfg.row_every;
    return p;
}

int paired_exit_code(const RemainderRecord& rec) {
    if (!rec.failed) return 0;
    return rec.failure.find("band") != std::string::npos ? 4 : 3;
}

ordered_json record_json(const RemainderRecord& rec) {
    ordered_json j;
    j["eps"] = rec.eps;
    j["dt"] = rec.dt;
    j["failed"] = rec.failed;
    j["failure"] = rec.failure;
    j["terminal_groups"] = rec.terminal_groups;
    j["terminal_functional"] = rec.terminal_functional;
    j["mhat"] = rec.eps > 0.0 ? rec.terminal_functional / rec.eps : 0.0;
    j["eta_end"] = rec.eta_end;
    j["eta_budget"] = rec.eta_budget;
    j["eta_within_budget"] = rec.eta_end < rec.eta_budget;
    j["mid_residual"] = residual_json(rec.mid_residual);
    return j;
}

std::string remainder_csv(const RemainderRecord& rec) {
    io::CsvWriter csv({"t", "group_pair", "group_dy", "group_dx", "group_t"});
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        csv.add_row({rec.times[i], rec.group_norms[i][0], rec.group_norms[i][1],
                     rec.group_norms[i][2], rec.group_norms[i][3]});
    return csv.str();
}

RunOutcome simulate_paired(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec grid = cfg.grid;
    const InitialData data = make_datum(grid, cfg.data);
    const RemainderRecord rec = run_paired(grid, data, paired_options(cfg));

    OutputSink sink(cfg.directory);
    sink.write("remainder.csv", remainder_csv(rec));
    io::CsvWriter eta({"t", "clock", "band_width"});
    for (const ClockSample& s : rec.eta_history) eta.add_row({s.t, s.clock, s.band_width});
    sink.write("eta_history.csv", eta.str());

    ordered_json rep;
    rep["version"] = io::kVersionString;
    rep["system"] = cfg.system;
    const int code = paired_exit_code(rec);
    rep["exit_code"] = code;
    rep["record"] = record_json(rec);
    sink.write("report.json", rep.dump(2) + "\n");
    sink.write("config.toml", serialize_config(cfg));
    sink.finalize("simulate", cfg, {{"total", seconds_since(t0)}});

    std::ostringstream s;
    if (rec.failed) s << rec.failure;
    else
        s << "ok: remainder functional " << rec.terminal_functional << " at eps = " << rec.eps
          << ", eta = " << rec.eta_end;
    return {code, s.str(), sink.files()};
}

// ---------- property suites for `check` ----------

Field2D random_covered(const GridSpec& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field2D f(grid);
    const int mmax =
        static_cast<int>(std::floor(covered_xi(grid) * grid.Lx / GridSpec::two_pi() + 1e-9));
    for (int m = 1; m <= mmax; ++m)
        for (int j = 0; j < grid.ny; ++j) {
            const std::complex<double> c(U(rng), U(rng));
            f.coeff(m, j) = c;
            f.coeff(-m, j) = std::conj(c);
        }
    for (int j = 0; j < grid.ny; ++j) f.slot(0, j) = U(rng);
    return f;
}

int lp_suite(std::uint64_t seed, std::ostringstream& log) {
    GridSpec grid;
    grid.ny = 17;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const CutoffPair cut;
    int failures = 0;

    const double xi_top = 1.2 * grid.xi_max();
    for (int i = 0; i < 200; ++i) {
        const double xi = 0.05 + (xi_top - 0.05) * U(rng);
        double total = cut.psi(xi);
        double homogeneous = 0.0;
        for (int q = -20; q <= 60; ++q) {
            const double block = cut.phi(std::ldexp(xi, -q));
            homogeneous += block;
            if (q >= 0) total += block;
        }
        if (std::abs(total - 1.0) > 1e-12 || std::abs(homogeneous - 1.0) > 1e-12) {
            ++failures;
            log << "  partition defect at xi = " << xi << "\n";
        }
    }

    for (int q = -5; q <= 10; ++q)
        for (int p = q + 2; p <= 10; ++p)
            for (int i = 0; i < 40; ++i) {
                const double xi = 0.05 + (xi_top - 0.05) * U(rng);
                if (cut.phi(std::ldexp(xi, -q)) * cut.phi(std::ldexp(xi, -p)) != 0.0) {
                    ++failures;
                    log << "  blocks " << q << " and " << p << " overlap at xi = " << xi << "\n";
                }
            }

    for (int i = 0; i < 20; ++i) {
        const Field2D f = random_covered(grid, rng);
        const DyadicLadder lad = ladder(f);
        Field2D sum = lad.low;
        for (const Field2D& b : lad.blocks) sum += b;
        const double rel = l2_norm(f - sum) / std::max(1e-300, l2_norm(f));
        if (lad.tail_rel > 1e-12 || rel > 1e-12) {
            ++failures;
            log << "  ladder reassembly defect " << rel << " (tail " << lad.tail_rel << ")\n";
        }
        const DyadicRange r = lad.range;
        if (r.count() >= 3) {
            const Field2D twice = dyadic_project(dyadic_project(f, r.q_min), r.q_min + 2);
            if (l2_norm(twice) != 0.0) {
                ++failures;
                log << "  distant blocks not orthogonal\n";
            }
        }
    }
    return failures;
}

int bernstein_suite(std::uint64_t seed, std::ostringstream& log) {
    GridSpec grid;
    grid.ny = 17;
    std::mt19937_64 rng(seed);
    int failures = 0;
    const DyadicRange range = resolvable_range(grid);
    for (int i = 0; i < 100; ++i) {
        const Field2D f = random_covered(grid, rng);
        for (int q = range.q_min; q <= range.q_max; ++q) {
            const Field2D block = dyadic_project(f, q);
            const double n = l2_norm(block);
            if (n < 1e-12) continue;
            const double ratio = l2_norm(d_dx(block)) / n;
            const double lo = 0.75 * std::ldexp(1.0, q) * (1.0 - 1e-10);
            const double hi = (8.0 / 3.0) * std::ldexp(1.0, q) * (1.0 + 1e-10);
            if (ratio < lo || ratio > hi) {
                ++failures;
                log << "  derivative ratio " << ratio << " outside [" << lo << ", " << hi
                    << "] at q = " << q << "\n";
            }
        }
    }
    return failures;
}

int bony_suite(std::uint64_t seed, std::ostringstream& log) {
    GridSpec grid;
    grid.ny = 17;
    std::mt19937_64 rng(seed);
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        const Field2D f = random_covered(grid, rng);
        const Field2D g = random_covered(grid, rng);
        const Field2D prod = multiply(f, g);
        const BonyParts parts = bony_decompose(f, g);
        const double err = l2_norm(prod - parts.Tfg - parts.Tgf - parts.R);
        const double tol = 1e-10 * std::max(1.0, l2_norm(prod));
        if (err > tol) {
            ++failures;
            log << "  paraproduct reassembly defect " << err << " (tol " << tol << ")\n";
        }
    }
    return failures;
}

// ---------- export helpers ----------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out.empty() ? std::string("col") : out;
}

}  // namespace

RunOutcome run_simulate(const RunConfig& config) {
    try {
        require_valid(config);
    } catch (const ConfigError& e) {
        return {2, e.what(), {}};
    }
    try {
        if (config.system == "paired") return simulate_paired(config);
        if (config.system == "anisotropic") return simulate_aniso(config);
        return simulate_hydro(config);
    } catch (const std::invalid_argument& e) {
        return {2, e.what(), {}};
    }
}

RunOutcome run_sweep(const RunConfig& config) {
    try {
        require_valid(config);
    } catch (const ConfigError& e) {
        return {2, e.what(), {}};
    }
    if (config.system != "paired")
        return {2, "run.system: sweep needs \"paired\", got \"" + config.system + "\"", {}};
    if (config.eps_list.size() < 3)
        return {2, "sweep.eps_list: needs at least three decreasing values", {}};

    int workers = config.workers;
    if (workers == 0) {
        if (const char* env = std::getenv("STRIPLAB_WORKERS")) {
            char* end = nullptr;
            const long w = std::strtol(env, &end, 10);
            if (end != nullptr && *end == '\0' && w > 0) workers = static_cast<int>(w);
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec grid = config.grid;
    InitialData data;
    SweepResult res;
    RefinementGate gate;
    double gate_seconds = 0.0;
    try {
        data = make_datum(grid, config.data);
        if (config.refine_gate) {
            PairedOptions gate_opts = paired_options(config);
            gate_opts.eps = config.eps_list.front();
            gate = refinement_gate(grid, config.data, gate_opts);
            gate_seconds = seconds_since(t0);
        }
        res = sweep(grid, data, paired_options(config), config.eps_list, workers);
    } catch (const std::invalid_argument& e) {
        return {2, e.what(), {}};
    }

    OutputSink sink(config.directory);
    io::CsvWriter table({"eps", "dt", "failed", "terminal_functional", "mhat", "eta_end"});
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const RemainderRecord& rec = res.records[i];
        table.add_row({rec.eps, rec.dt, rec.failed ? 1.0 : 0.0, rec.terminal_functional,
                       rec.eps > 0.0 ? rec.terminal_functional / rec.eps : 0.0, rec.eta_end});
        sink.write("remainder_" + zero_pad(static_cast<long>(i), 3) + ".csv", remainder_csv(rec));
    }
    sink.write("sweep.csv", table.str());

    ordered_json rep;
    rep["version"] = io::kVersionString;
    rep["eps_list"] = config.eps_list;
    rep["workers_requested"] = workers;
    if (config.refine_gate)
        rep["gate"] = ordered_json{{"coarse_norm", gate.coarse_norm},
                                   {"fine_norm", gate.fine_norm},
                                   {"rel_change", gate.rel_change},
                                   {"pass", gate.pass},
                                   {"failed_run", gate.failed_run},
                                   {"failure", gate.failure}};
    rep["fit"] = ordered_json{{"slope", res.fit.slope},
                              {"intercept", res.fit.intercept},
                              {"residual", res.fit.residual},
                              {"degenerate", res.fit.degenerate},
                              {"pair_slopes", res.fit.pair_slopes}};
    rep["eps_ok"] = res.eps_ok;
    rep["norms_ok"] = res.norms_ok;
    rep["mhat"] = ordered_json{{"min", res.mhat_min},
                               {"max", res.mhat_max},
                               {"variation", res.mhat_variation}};
    ordered_json recs = ordered_json::array();
    for (const RemainderRecord& rec : res.records) recs.push_back(record_json(rec));
    rep["records"] = std::move(recs);
    sink.write("sweep.json", rep.dump(2) + "\n");
    sink.write("config.toml", serialize_config(config));
    sink.finalize("sweep", config,
                  {{"gate", gate_seconds}, {"total", seconds_since(t0)}});

    int code = 0;
    std::ostringstream msg;
    if (config.refine_gate && gate.failed_run) {
        code = 3;
        msg << "refinement gate run failed: " << gate.failure;
    } else if (res.degenerate) {
        code = 3;
        msg << "sweep produced no usable fit";
        for (const RemainderRecord& rec : res.records)
            if (rec.failed) {
                msg << " (first failure: " << rec.failure << ")";
                break;
            }
    } else if (config.refine_gate && !gate.pass) {
        code = 5;
        msg << "refinement gate failed: functional moved " << 100.0 * gate.rel_change
            << "% under grid refinement";
    } else {
        msg << "slope = " << res.fit.slope << ", mhat variation = " << res.mhat_variation;
    }
    return {code, msg.str(), sink.files()};
}

RunOutcome run_check(const std::string& suite, std::uint64_t seed) {
    const bool all = suite == "all";
    if (!all && suite != "lp" && suite != "bernstein" && suite != "bony")
        return {2, "unknown suite \"" + suite + "\" (expected lp, bernstein, bony, or all)", {}};

    std::ostringstream log;
    std::ostringstream summary;
    int failures = 0;
    if (all || suite == "lp") {
        const int f = lp_suite(seed, log);
        failures += f;
        summary << "lp: " << (f == 0 ? "ok" : "FAILED") << "; ";
    }
    if (all || suite == "bernstein") {
        const int f = bernstein_suite(seed, log);
        failures += f;
        summary << "bernstein: " << (f == 0 ? "ok" : "FAILED") << "; ";
    }
    if (all || suite == "bony") {
        const int f = bony_suite(seed, log);
        failures += f;
        summary << "bony: " << (f == 0 ? "ok" : "FAILED") << "; ";
    }
    std::string msg = summary.str();
    if (msg.size() >= 2) msg.erase(msg.size() - 2);
    if (failures > 0) msg += "\n" + log.str();
    return {failures == 0 ? 0 : 5, msg, {}};
}

RunOutcome run_validate(const RunConfig& config) {
    const std::vector<std::string> problems = config_diagnostics(config);
    if (problems.empty()) return {0, "config ok", {}};
    std::string msg = std::to_string(problems.size()) + " problem(s):";
    for (const std::string& p : problems) msg += "\n  - " + p;
    return {2, msg, {}};
}

RunOutcome run_export(const std::string& run_dir, const std::string& format,
                      const std::string& out_dir) {
    if (format != "csv" && format != "json")
        return {2, "export format must be \"csv\" or \"json\", got \"" + format + "\"", {}};
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(io::read_file(run_dir + "/manifest.json"));
    } catch (const std::exception& e) {
        return {2, std::string("cannot read run manifest: ") + e.what(), {}};
    }
    if (!manifest.contains("outputs") || !manifest["outputs"].is_array())
        return {2, "manifest.json lists no outputs", {}};

    std::vector<std::string> files;
    ordered_json bundle_files = ordered_json::array();
    int tables = 0;
    for (const ordered_json& entry : manifest["outputs"]) {
        const std::string name = entry.value("file", "");
        if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
        const CsvTable t = parse_csv(io::read_file(run_dir + "/" + name));
        if (t.header.size() < 2) continue;
        ++tables;
        const std::string stem = name.substr(0, name.size() - 4);
        if (format == "csv") {
            for (std::size_t c = 1; c < t.header.size(); ++c) {
                std::string out = t.header[0] + "," + t.header[c] + "\n";
                for (const std::vector<std::string>& row : t.rows) {
                    if (row.size() != t.header.size())
                        return {2, name + ": ragged row (width " + std::to_string(row.size()) +
                                       " vs header " + std::to_string(t.header.size()) + ")",
                                {}};
                    out += row[0] + "," + row[c] + "\n";
                }
                const std::string oname = stem + "." + sanitize_name(t.header[c]) + ".csv";
                io::write_file(out_dir + "/" + oname, out);
                files.push_back(oname);
                bundle_files.push_back(ordered_json{
                    {"file", oname}, {"source", name}, {"rows", t.rows.size()}});
            }
        } else {
            ordered_json cols = ordered_json::object();
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                ordered_json arr = ordered_json::array();
                for (const std::vector<std::string>& row : t.rows) {
                    if (row.size() != t.header.size())
                        return {2, name + ": ragged row", {}};
                    arr.push_back(std::strtod(row[c].c_str(), nullptr));
                }
                cols[t.header[c]] = std::move(arr);
            }
            const ordered_json j{
                {"source", name}, {"rows", t.rows.size()}, {"columns", std::move(cols)}};
            const std::string oname = stem + ".json";
            io::write_file(out_dir + "/" + oname, j.dump(2) + "\n");
            files.push_back(oname);
            bundle_files.push_back(
                ordered_json{{"file", oname}, {"source", name}, {"rows", t.rows.size()}});
        }
    }
    const ordered_json bundle{
        {"source_dir", run_dir}, {"format", format}, {"files", std::move(bundle_files)}};
    io::write_file(out_dir + "/bundle.json", bundle.dump(2) + "\n");
    files.push_back("bundle.json");
    return {0, "exported " + std::to_string(files.size()) + " files from " +
                   std::to_string(tables) + " tables",
            files};
}

}  // namespace striplab
