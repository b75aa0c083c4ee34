#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "striplab/config.hpp"

namespace striplab {

/// Result of one orchestrated operation, ready for a CLI to relay.
///
/// Exit codes: 0 success, 2 configuration problem, 3 blow-up or violated
/// stability cap (also: a sweep with no usable fit), 4 analytic band
/// exhausted, 5 a self-check or gate failed.
struct RunOutcome {
    int exit_code = 0;
    std::string message;
    std::vector<std::string> files;  ///< run-directory-relative paths written
};

/// Executes the configured run (hydrostatic, anisotropic, or paired) and
/// writes the run directory: per-step ledger and diagnostic CSVs, optional
/// snapshots, report.json, the canonical config echo, manifest.json listing
/// every output with its sha256, and timings.txt (the one file left out of
/// the hash list, because wall-clock times differ between reruns). Outputs
/// other than timings.txt are byte-identical for identical config and build.
RunOutcome run_simulate(const RunConfig& config);

/// Paired-run sweep over config.eps_list with the optional grid-refinement
/// gate first. Writes per-eps remainder CSVs, sweep.csv, sweep.json, and the
/// same manifest machinery as run_simulate.
RunOutcome run_sweep(const RunConfig& config);

/// Seeded property suites: "lp", "bernstein", "bony", or "all". Pure
/// in-memory checks, no files written.
RunOutcome run_check(const std::string& suite, std::uint64_t seed);

/// Field-level diagnostics of the config; never executes any physics.
RunOutcome run_validate(const RunConfig& config);

/// Converts the CSV outputs listed in run_dir/manifest.json into plot-ready
/// per-column CSVs (format "csv") or column-array JSON (format "json") under
/// out_dir, plus bundle.json recording the row count of every file.
RunOutcome run_export(const std::string& run_dir, const std::string& format,
                      const std::string& out_dir);

}  // namespace striplab
