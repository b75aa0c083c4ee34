// Command line front end: thin argument plumbing over striplab::run_*.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "striplab/config.hpp"
#include "striplab/io.hpp"
#include "striplab/runner.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::string system;
    std::string data_name;
    std::string vertical;
    std::string out_dir;
    double amplitude = 0.0;
    double t_end = 0.0;
    double dt = 0.0;
    double eps = 0.0;
    double a = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    double R = 0.0;
    int nx = 0;
    int ny = 0;
    int mode = 0;
    int vertical_mode = 0;
    int row_every = 0;
    int snapshot_every = 0;
    int workers = 0;
    std::uint64_t seed = 0;
    bool linear = false;
    bool no_gate = false;
    std::vector<double> eps_list;
    std::vector<double> s_list;
    std::vector<std::string> monitors;
};

using OptionMap = std::map<std::string, CLI::Option*>;

void add_run_options(CLI::App* cmd, Flags& f, OptionMap& opt, bool sweep_mode) {
    opt["config"] = cmd->add_option("config", f.config_path, "config file (TOML-style schema)")
                        ->check(CLI::ExistingFile);
    opt["system"] =
        cmd->add_option("--system", f.system, "hydrostatic | anisotropic | paired");
    opt["data"] = cmd->add_option("--data", f.data_name,
                                  "datum family: zero, gauss-sine, cos-mode, random-band");
    opt["amplitude"] = cmd->add_option("--amplitude", f.amplitude, "datum amplitude");
    opt["mode"] = cmd->add_option("--mode", f.mode, "cos-mode horizontal mode");
    opt["vertical-mode"] =
        cmd->add_option("--vertical-mode", f.vertical_mode, "cos-mode vertical mode (even)");
    opt["t-end"] = cmd->add_option("--t-end", f.t_end, "final time");
    opt["dt"] = cmd->add_option("--dt", f.dt, "time step; 0 picks the stability default");
    if (sweep_mode) {
        opt["eps"] = cmd->add_option("--eps", f.eps_list, "comma-separated decreasing eps list")
                         ->delimiter(',');
        opt["workers"] = cmd->add_option("--workers", f.workers,
                                         "parallel runs; 0 = STRIPLAB_WORKERS or hardware");
        opt["no-gate"] = cmd->add_flag("--no-gate", f.no_gate, "skip the grid-refinement gate");
    } else {
        opt["eps"] = cmd->add_option("--eps", f.eps, "strip thickness parameter");
        opt["snapshot-every"] = cmd->add_option("--snapshot-every", f.snapshot_every,
                                                "field snapshots every k steps; 0 disables");
    }
    opt["a"] = cmd->add_option("--a", f.a, "analytic band budget");
    opt["lambda"] = cmd->add_option("--lambda", f.lambda, "theta/tau band rate");
    opt["mu"] = cmd->add_option("--mu", f.mu, "eta band rate (paired runs)");
    opt["R"] = cmd->add_option("--R", f.R, "time-exponential monitor rate; negative = default");
    opt["nx"] = cmd->add_option("--nx", f.nx, "horizontal modes");
    opt["ny"] = cmd->add_option("--ny", f.ny, "vertical collocation points");
    opt["vertical"] = cmd->add_option("--vertical", f.vertical, "chebyshev | fd2");
    opt["seed"] = cmd->add_option("--seed", f.seed, "seed for randomized data");
    opt["linear"] = cmd->add_flag("--linear", f.linear, "drop the nonlinear terms");
    opt["monitor"] = cmd->add_option("--monitor", f.monitors,
                                     "ledgers to run: hydro, aniso, vorticity")
                         ->delimiter(',');
    opt["s"] = cmd->add_option("--s", f.s_list, "Besov indices monitored")->delimiter(',');
    opt["row-every"] = cmd->add_option("--row-every", f.row_every, "diagnostic row cadence");
    opt["out"] = cmd->add_option("--out", f.out_dir, "output directory");
}

bool set(const OptionMap& opt, const char* name) {
    const auto it = opt.find(name);
    return it != opt.end() && it->second->count() > 0;
}

striplab::RunConfig make_config(const Flags& f, const OptionMap& opt) {
    striplab::RunConfig cfg;
    if (set(opt, "config")) cfg = striplab::load_config(f.config_path);
    if (set(opt, "system")) {
        cfg.system = f.system;
        // Keep the default monitor consistent when only the system is given.
        if (!set(opt, "monitor") && f.system == "anisotropic" && cfg.monitors ==
            std::vector<std::string>{"hydro"})
            cfg.monitors = {"aniso"};
    }
    if (set(opt, "data")) cfg.data.name = f.data_name;
    if (set(opt, "amplitude")) cfg.data.amplitude = f.amplitude;
    if (set(opt, "mode")) cfg.data.mode = f.mode;
    if (set(opt, "vertical-mode")) cfg.data.vertical_mode = f.vertical_mode;
    if (set(opt, "t-end")) cfg.t_end = f.t_end;
    if (set(opt, "dt")) cfg.dt = f.dt;
    if (set(opt, "a")) cfg.a = f.a;
    if (set(opt, "lambda")) cfg.lambda = f.lambda;
    if (set(opt, "mu")) cfg.mu = f.mu;
    if (set(opt, "R")) cfg.R = f.R;
    if (set(opt, "nx")) cfg.grid.nx = f.nx;
    if (set(opt, "ny")) cfg.grid.ny = f.ny;
    if (set(opt, "vertical")) {
        if (f.vertical == "chebyshev")
            cfg.grid.vertical = striplab::VerticalScheme::ChebyshevCollocation;
        else if (f.vertical == "fd2")
            cfg.grid.vertical = striplab::VerticalScheme::FiniteDifference2;
        else
            throw striplab::ConfigError("--vertical: unknown scheme \"" + f.vertical +
                                        "\" (expected \"chebyshev\" or \"fd2\")");
    }
    if (set(opt, "seed")) cfg.seed = f.seed;
    if (set(opt, "linear")) cfg.nonlinear = !f.linear;
    if (set(opt, "monitor")) cfg.monitors = f.monitors;
    if (set(opt, "s")) cfg.monitor_s = f.s_list;
    if (set(opt, "row-every")) cfg.row_every = f.row_every;
    if (set(opt, "out")) cfg.directory = f.out_dir;
    cfg.data.seed = cfg.seed;
    return cfg;
}

int relay(const striplab::RunOutcome& out) {
    std::printf("%s\n", out.message.c_str());
    for (const std::string& file : out.files) std::printf("  %s\n", file.c_str());
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"striplab: spectral laboratory for damped wave flows in a thin strip"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 config error, 3 blow-up / violated cap / no usable fit,\n"
               "            4 analytic band exhausted, 5 failed self-check or gate.\n"
               "STRIPLAB_WORKERS sets the sweep worker count when --workers is 0.");

    Flags sim_flags;
    OptionMap sim_opts;
    CLI::App* sim = app.add_subcommand("simulate", "run one configured experiment");
    add_run_options(sim, sim_flags, sim_opts, false);

    Flags sweep_flags;
    OptionMap sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "paired-run convergence sweep over eps");
    add_run_options(sweep, sweep_flags, sweep_opts, true);

    std::string suite = "all";
    std::uint64_t check_seed = 1234;
    CLI::App* check = app.add_subcommand("check", "seeded property suites (no files written)");
    check->add_option("--suite", suite, "lp | bernstein | bony | all");
    check->add_option("--seed", check_seed, "suite rng seed");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "diagnose a config without running it");
    validate->add_option("config", validate_path, "config file")
        ->required()
        ->check(CLI::ExistingFile);

    std::string export_dir;
    std::string export_format = "csv";
    std::string export_out;
    CLI::App* exp = app.add_subcommand("export", "convert a run directory to plot-ready files");
    exp->add_option("run_dir", export_dir, "run directory containing manifest.json")->required();
    exp->add_option("--format", export_format, "csv | json");
    exp->add_option("--out", export_out, "destination directory (default <run_dir>/export)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            striplab::RunConfig cfg = make_config(sim_flags, sim_opts);
            if (set(sim_opts, "eps")) cfg.eps = sim_flags.eps;
            if (set(sim_opts, "snapshot-every")) cfg.snapshot_every = sim_flags.snapshot_every;
            return relay(striplab::run_simulate(cfg));
        }
        if (sweep->parsed()) {
            striplab::RunConfig cfg = make_config(sweep_flags, sweep_opts);
            cfg.system = "paired";
            if (set(sweep_opts, "eps")) cfg.eps_list = sweep_flags.eps_list;
            if (set(sweep_opts, "workers")) cfg.workers = sweep_flags.workers;
            if (sweep_flags.no_gate) cfg.refine_gate = false;
            if (!cfg.eps_list.empty()) cfg.eps = cfg.eps_list.front();
            return relay(striplab::run_sweep(cfg));
        }
        if (check->parsed()) return relay(striplab::run_check(suite, check_seed));
        if (validate->parsed())
            return relay(striplab::run_validate(striplab::load_config(validate_path)));
        if (exp->parsed()) {
            if (export_out.empty()) export_out = export_dir + "/export";
            return relay(striplab::run_export(export_dir, export_format, export_out));
        }
    } catch (const striplab::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
