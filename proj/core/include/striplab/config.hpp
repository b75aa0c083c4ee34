#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "striplab/catalog.hpp"
#include "striplab/grid.hpp"

namespace striplab {

/// Parse or schema failure; the message names the offending section.key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Full experiment description, one file per run. Defaults below are the
/// values assumed for keys absent from the file.
struct RunConfig {
    int schema_version = 1;

    GridSpec grid;  ///< [grid] Lx, nx, ny, vertical = "chebyshev" | "fd2"

    // [band]
    double a = 0.4;
    double lambda = 2.0;
    double mu = 4.0;     ///< eta rate, paired runs only
    double R = -1.0;     ///< negative -> 0.9 * min(1/8, k/8)

    // [run]
    std::string system = "hydrostatic";  ///< hydrostatic | anisotropic | paired
    double t_end = 1.0;
    double dt = 0.0;  ///< 0 -> stability-derived default
    bool nonlinear = true;
    double eps = 0.1;
    std::uint64_t seed = 1234;  ///< randomized data and property suites

    // [data]
    CatalogRequest data;  ///< data.seed mirrors the run seed after parsing

    // [monitor]
    std::vector<double> monitor_s{0.5};
    std::vector<std::string> monitors{"hydro"};
    int row_every = 1;

    // [sweep]
    std::vector<double> eps_list;
    int workers = 0;  ///< 0 -> STRIPLAB_WORKERS env or hardware count
    bool refine_gate = true;

    // [output]
    std::string directory = "runs/out";
    int snapshot_every = 0;  ///< field snapshots every k steps; 0 disables

    bool operator==(const RunConfig&) const = default;
};

/// Parses the TOML-style text: [section] headers, key = value lines,
/// "#" comments, values typed as string, bool, integer, float, or a
/// homogeneous array. Unknown sections or keys, duplicate keys, type
/// mismatches, and a missing or unsupported schema_version are ConfigErrors
/// naming the location. Range checking is left to config_diagnostics.
RunConfig parse_config(const std::string& text);

/// parse_config on the file's bytes; the filename is prefixed to errors.
RunConfig load_config(const std::string& path);

/// Canonical serialization: every key in schema order, floats at 17
/// significant digits, so parse(serialize(c)) == c exactly.
std::string serialize_config(const RunConfig& config);

/// Field-level semantic problems ("section.key: message"), empty when the
/// config is runnable. Never executes any physics.
std::vector<std::string> config_diagnostics(const RunConfig& config);

/// Throws ConfigError with the joined diagnostics when any exist.
void require_valid(const RunConfig& config);

}  // namespace striplab
