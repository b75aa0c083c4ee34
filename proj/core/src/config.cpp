#include "striplab/config.hpp"

#include <cctype>
#include <climits>
#include <set>
#include <sstream>
#include <string>

#include "striplab/io.hpp"

namespace striplab {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Drop everything from the first '#' that sits outside double quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

long long parse_int(const std::string& raw, const std::string& loc) {
    for (char c : raw)
        if (c == '.' || c == 'e' || c == 'E')
            throw ConfigError(loc + ": expected an integer, got \"" + raw + "\"");
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(raw, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != raw.size())
        throw ConfigError(loc + ": expected an integer, got \"" + raw + "\"");
    return v;
}

int parse_int32(const std::string& raw, const std::string& loc) {
    long long v = parse_int(raw, loc);
    if (v < INT_MIN || v > INT_MAX)
        throw ConfigError(loc + ": integer out of range: " + raw);
    return static_cast<int>(v);
}

std::uint64_t parse_uint(const std::string& raw, const std::string& loc) {
    if (raw.empty() || raw[0] == '-')
        throw ConfigError(loc + ": expected a nonnegative integer, got \"" + raw + "\"");
    for (char c : raw)
        if (c == '.' || c == 'e' || c == 'E')
            throw ConfigError(loc + ": expected a nonnegative integer, got \"" + raw + "\"");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(raw, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != raw.size())
        throw ConfigError(loc + ": expected a nonnegative integer, got \"" + raw + "\"");
    return static_cast<std::uint64_t>(v);
}

double parse_float(const std::string& raw, const std::string& loc) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != raw.size())
        throw ConfigError(loc + ": expected a number, got \"" + raw + "\"");
    return v;
}

bool parse_bool(const std::string& raw, const std::string& loc) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError(loc + ": expected true or false, got \"" + raw + "\"");
}

std::string parse_str(const std::string& raw, const std::string& loc) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"')
        throw ConfigError(loc + ": expected a quoted string, got " + raw);
    const std::string body = raw.substr(1, raw.size() - 2);
    if (body.find('"') != std::string::npos || body.find('\\') != std::string::npos)
        throw ConfigError(loc + ": escapes and embedded quotes are not supported");
    return body;
}

// Splits "[a, b, c]" into trimmed element strings; "[]" gives an empty list.
std::vector<std::string> split_list(const std::string& raw, const std::string& loc) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
        throw ConfigError(loc + ": expected an array [ ... ], got " + raw);
    const std::string body = raw.substr(1, raw.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty()) items.push_back(last);
    else if (!items.empty()) throw ConfigError(loc + ": trailing comma in array");
    for (const std::string& it : items)
        if (it.empty()) throw ConfigError(loc + ": empty array element");
    return items;
}

std::vector<double> parse_float_list(const std::string& raw, const std::string& loc) {
    std::vector<double> out;
    for (const std::string& it : split_list(raw, loc)) out.push_back(parse_float(it, loc));
    return out;
}

std::vector<std::string> parse_str_list(const std::string& raw, const std::string& loc) {
    std::vector<std::string> out;
    for (const std::string& it : split_list(raw, loc)) out.push_back(parse_str(it, loc));
    return out;
}

bool known_section(const std::string& s) {
    static const std::set<std::string> names{"grid", "band",  "run",   "data",
                                             "monitor", "sweep", "output"};
    return names.count(s) > 0;
}

// One key = value line, already located in `sec`. Throws on unknown keys.
void apply(RunConfig& c, const std::string& sec, const std::string& key, const std::string& raw,
           bool& have_version) {
    const std::string loc = sec.empty() ? key : sec + "." + key;
    if (sec.empty()) {
        if (key == "schema_version") {
            const long long v = parse_int(raw, loc);
            if (v != 1)
                throw ConfigError(loc + ": unsupported version " + std::to_string(v) +
                                  " (this build reads version 1)");
            c.schema_version = 1;
            have_version = true;
            return;
        }
        throw ConfigError("unknown top-level key \"" + key +
                          "\" (only schema_version precedes the sections)");
    }
    if (sec == "grid") {
        if (key == "Lx") return void(c.grid.Lx = parse_float(raw, loc));
        if (key == "nx") return void(c.grid.nx = parse_int32(raw, loc));
        if (key == "ny") return void(c.grid.ny = parse_int32(raw, loc));
        if (key == "vertical") {
            const std::string v = parse_str(raw, loc);
            if (v == "chebyshev") c.grid.vertical = VerticalScheme::ChebyshevCollocation;
            else if (v == "fd2") c.grid.vertical = VerticalScheme::FiniteDifference2;
            else
                throw ConfigError(loc + ": unknown scheme \"" + v +
                                  "\" (expected \"chebyshev\" or \"fd2\")");
            return;
        }
    } else if (sec == "band") {
        if (key == "a") return void(c.a = parse_float(raw, loc));
        if (key == "lambda") return void(c.lambda = parse_float(raw, loc));
        if (key == "mu") return void(c.mu = parse_float(raw, loc));
        if (key == "R") return void(c.R = parse_float(raw, loc));
    } else if (sec == "run") {
        if (key == "system") return void(c.system = parse_str(raw, loc));
        if (key == "t_end") return void(c.t_end = parse_float(raw, loc));
        if (key == "dt") return void(c.dt = parse_float(raw, loc));
        if (key == "nonlinear") return void(c.nonlinear = parse_bool(raw, loc));
        if (key == "eps") return void(c.eps = parse_float(raw, loc));
        if (key == "seed") return void(c.seed = parse_uint(raw, loc));
    } else if (sec == "data") {
        if (key == "name") return void(c.data.name = parse_str(raw, loc));
        if (key == "amplitude") return void(c.data.amplitude = parse_float(raw, loc));
        if (key == "mode") return void(c.data.mode = parse_int32(raw, loc));
        if (key == "vertical_mode") return void(c.data.vertical_mode = parse_int32(raw, loc));
        if (key == "sigma") return void(c.data.sigma = parse_float(raw, loc));
        if (key == "max_mode") return void(c.data.max_mode = parse_int32(raw, loc));
    } else if (sec == "monitor") {
        if (key == "s_list") return void(c.monitor_s = parse_float_list(raw, loc));
        if (key == "enable") return void(c.monitors = parse_str_list(raw, loc));
        if (key == "row_every") return void(c.row_every = parse_int32(raw, loc));
    } else if (sec == "sweep") {
        if (key == "eps_list") return void(c.eps_list = parse_float_list(raw, loc));
        if (key == "workers") return void(c.workers = parse_int32(raw, loc));
        if (key == "refine_gate") return void(c.refine_gate = parse_bool(raw, loc));
    } else if (sec == "output") {
        if (key == "directory") return void(c.directory = parse_str(raw, loc));
        if (key == "snapshot_every") return void(c.snapshot_every = parse_int32(raw, loc));
    }
    throw ConfigError("unknown key " + loc);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string float_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += io::format_float(v[i]);
    }
    return s + "]";
}

std::string str_list(const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += quoted(v[i]);
    }
    return s + "]";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::set<std::string> seen;
    bool have_version = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(where + ": malformed section header \"" + s + "\"");
            section = trim(s.substr(1, s.size() - 2));
            if (!known_section(section))
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value, got \"" + s + "\"");
        const std::string key = trim(s.substr(0, eq));
        const std::string raw = trim(s.substr(eq + 1));
        const std::string loc = section.empty() ? key : section + "." + key;
        if (key.empty()) throw ConfigError(where + ": missing key before '='");
        if (!seen.insert(loc).second) throw ConfigError(loc + ": duplicate key");
        if (raw.empty()) throw ConfigError(loc + ": missing value");
        apply(cfg, section, key, raw, have_version);
    }
    if (!have_version)
        throw ConfigError("schema_version: required key is missing (expected schema_version = 1)");
    cfg.data.seed = cfg.seed;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    try {
        return parse_config(io::read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string serialize_config(const RunConfig& c) {
    const auto f = io::format_float;
    std::ostringstream out;
    out << "schema_version = " << c.schema_version << "\n";
    out << "\n[grid]\n";
    out << "Lx = " << f(c.grid.Lx) << "\n";
    out << "nx = " << c.grid.nx << "\n";
    out << "ny = " << c.grid.ny << "\n";
    out << "vertical = " << quoted(to_string(c.grid.vertical)) << "\n";
    out << "\n[band]\n";
    out << "a = " << f(c.a) << "\n";
    out << "lambda = " << f(c.lambda) << "\n";
    out << "mu = " << f(c.mu) << "\n";
    out << "R = " << f(c.R) << "\n";
    out << "\n[run]\n";
    out << "system = " << quoted(c.system) << "\n";
    out << "t_end = " << f(c.t_end) << "\n";
    out << "dt = " << f(c.dt) << "\n";
    out << "nonlinear = " << (c.nonlinear ? "true" : "false") << "\n";
    out << "eps = " << f(c.eps) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "\n[data]\n";
    out << "name = " << quoted(c.data.name) << "\n";
    out << "amplitude = " << f(c.data.amplitude) << "\n";
    out << "mode = " << c.data.mode << "\n";
    out << "vertical_mode = " << c.data.vertical_mode << "\n";
    out << "sigma = " << f(c.data.sigma) << "\n";
    out << "max_mode = " << c.data.max_mode << "\n";
    out << "\n[monitor]\n";
    out << "s_list = " << float_list(c.monitor_s) << "\n";
    out << "enable = " << str_list(c.monitors) << "\n";
    out << "row_every = " << c.row_every << "\n";
    out << "\n[sweep]\n";
    out << "eps_list = " << float_list(c.eps_list) << "\n";
    out << "workers = " << c.workers << "\n";
    out << "refine_gate = " << (c.refine_gate ? "true" : "false") << "\n";
    out << "\n[output]\n";
    out << "directory = " << quoted(c.directory) << "\n";
    out << "snapshot_every = " << c.snapshot_every << "\n";
    return out.str();
}

std::vector<std::string> config_diagnostics(const RunConfig& c) {
    std::vector<std::string> out;
    try {
        c.grid.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("grid: ") + e.what());
    }

    if (!(c.a > 0.0)) out.push_back("band.a: must be positive");
    const double cap = c.a * c.grid.xi_max();
    if (c.a > 0.0 && cap > 300.0)
        out.push_back("band.a: a * xi_max = " + std::to_string(cap) +
                      " exceeds the exp-weight overflow cap 300");
    if (!(c.lambda > 0.0)) out.push_back("band.lambda: must be positive");
    if (c.R >= 0.125)
        out.push_back("band.R: must stay below 1/8 (the full bound also caps at"
                      " poincare/8, checked when the monitor starts)");

    const bool hydro_like = c.system == "hydrostatic" || c.system == "paired";
    const bool aniso_like = c.system == "anisotropic" || c.system == "paired";
    if (!hydro_like && !aniso_like)
        out.push_back("run.system: unknown system \"" + c.system +
                      "\" (expected hydrostatic, anisotropic, or paired)");
    if (!(c.t_end > 0.0)) out.push_back("run.t_end: must be positive");
    if (!(c.dt >= 0.0)) out.push_back("run.dt: must be nonnegative (0 selects the stability default)");
    if (aniso_like && !(c.eps > 0.0))
        out.push_back("run.eps: must be positive for anisotropic and paired runs");
    if (c.system == "paired" && !(c.mu >= c.lambda))
        out.push_back("band.mu: remainder rate must be at least lambda for paired runs");

    bool known_name = false;
    for (const std::string& n : catalog_names()) known_name = known_name || n == c.data.name;
    if (!known_name) {
        std::string names;
        for (const std::string& n : catalog_names()) names += (names.empty() ? "" : ", ") + n;
        out.push_back("data.name: unknown datum \"" + c.data.name + "\" (available: " + names + ")");
    }
    if (!(c.data.amplitude >= 0.0)) out.push_back("data.amplitude: must be nonnegative");
    if (c.data.mode < 1) out.push_back("data.mode: must be at least 1");
    if (c.data.vertical_mode < 2 || c.data.vertical_mode % 2 != 0)
        out.push_back("data.vertical_mode: must be an even integer >= 2");
    if (!(c.data.sigma >= 0.0)) out.push_back("data.sigma: must be nonnegative (0 selects Lx/8)");
    if (c.data.max_mode < 1) out.push_back("data.max_mode: must be at least 1");

    if (c.monitor_s.empty()) out.push_back("monitor.s_list: needs at least one exponent");
    for (double s : c.monitor_s)
        if (!(s >= -2.0 && s <= 4.0))
            out.push_back("monitor.s_list: exponent " + std::to_string(s) +
                          " outside the supported range [-2, 4]");
    for (const std::string& m : c.monitors) {
        if (m == "hydro" || m == "vorticity") {
            if (!hydro_like)
                out.push_back("monitor.enable: \"" + m + "\" needs a hydrostatic or paired run");
        } else if (m == "aniso") {
            if (!aniso_like)
                out.push_back("monitor.enable: \"aniso\" needs an anisotropic or paired run");
        } else {
            out.push_back("monitor.enable: unknown monitor \"" + m +
                          "\" (expected hydro, aniso, or vorticity)");
        }
    }
    if (c.row_every < 1) out.push_back("monitor.row_every: must be at least 1");

    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0)) {
            out.push_back("sweep.eps_list: entries must be positive");
            break;
        }
        if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) {
            out.push_back("sweep.eps_list: entries must be strictly decreasing");
            break;
        }
    }
    if (c.workers < 0) out.push_back("sweep.workers: must be nonnegative (0 selects automatic)");

    if (c.directory.empty()) out.push_back("output.directory: must not be empty");
    if (c.snapshot_every < 0) out.push_back("output.snapshot_every: must be nonnegative (0 disables)");
    return out;
}

void require_valid(const RunConfig& config) {
    const std::vector<std::string> problems = config_diagnostics(config);
    if (problems.empty()) return;
    std::string msg = "config invalid:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
}

}  // namespace striplab
