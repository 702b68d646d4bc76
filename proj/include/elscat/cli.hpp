#pragma once

// Run configuration, config-file parsing and the driver modes behind tools/elscat.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "elscat/fields.hpp"

namespace elscat {

enum class RunMode { Solve, PointSourceTest, PlaneWaveSelfConvergence, ConvergenceTable };

struct RunConfig {
    std::string geometry = "ellipsoid";
    std::array<double, 3> ellipsoid_axes{1.0, 0.75, 0.5};
    ElasticMedium medium;
    std::vector<int> n{5};
    int nprime = -1;  // -1: 2n+1
    RunMode mode = RunMode::Solve;
    IncidenceKind incidence = IncidenceKind::PointSource;
    Vec3 direction{0.0, 0.0, 1.0};
    Vec3 polarization{1.0, 0.0, 0.0};
    Vec3 source{0.0, 0.05, 0.0866};
    double amplitude = 1.0;
    ObservationGrid grid;
    std::string out = "-";
    std::string coefficients;  // optional coefficient CSV path (solve mode)
    std::string cache_dir = ".elscat-cache";
    int threads = 1;
    int reference_n = 40;

    void validate() const {
        medium.validate();
        if (n.empty()) throw ConfigError("n: at least one degree is required");
        for (int k : n) {
            if (k < 1) throw ConfigError("n: degree must be at least 1");
            if (nprime >= 0 && nprime < k + 1) throw ConfigError("nprime: must be at least n+1");
        }
        if (threads < 1) throw ConfigError("threads: must be positive");
        if (grid.n_theta < 1 || grid.n_phi < 1) throw ConfigError("obs-grid: both factors must be positive");
        if (mode == RunMode::PlaneWaveSelfConvergence && incidence == IncidenceKind::PointSource)
            throw ConfigError("mode planewave-selfconvergence needs a plane-wave incidence");
        if (mode == RunMode::PointSourceTest && incidence != IncidenceKind::PointSource)
            throw ConfigError("mode pointsource-test needs incidence pointsource");
        for (int k : n)
            if (mode == RunMode::PlaneWaveSelfConvergence && k >= reference_n)
                throw ConfigError("reference-n must exceed every n of the table");
        make_incident().validate();
        (void)make_surface();
    }

    Surface make_surface() const {
        if (geometry == "sphere") return Surface::sphere();
        if (geometry == "ellipsoid") return Surface::ellipsoid(ellipsoid_axes[0], ellipsoid_axes[1], ellipsoid_axes[2]);
        if (geometry == "cushion") return Surface::cushion();
        if (geometry == "bean") return Surface::bean();
        throw ConfigError("geometry: unknown shape '" + geometry + "' (sphere, ellipsoid, cushion, bean)");
    }

    IncidentField make_incident() const {
        IncidentField f;
        f.kind = incidence;
        f.medium = medium;
        f.source = source;
        f.direction = direction;
        f.polarization = polarization;
        f.amplitude = amplitude;
        return f;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
    return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return int(x);
}

inline std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
    const auto parts = split(v, ',');
    if (parts.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

}  // namespace detail

inline RunMode parse_mode(const std::string& v) {
    if (v == "solve") return RunMode::Solve;
    if (v == "pointsource-test") return RunMode::PointSourceTest;
    if (v == "planewave-selfconvergence") return RunMode::PlaneWaveSelfConvergence;
    if (v == "convergence-table") return RunMode::ConvergenceTable;
    throw ConfigError("mode: unknown mode '" + v + "'");
}

inline IncidenceKind parse_incidence(const std::string& v) {
    if (v == "pointsource") return IncidenceKind::PointSource;
    if (v == "plane") return IncidenceKind::PlaneElastic;
    if (v == "plane-p") return IncidenceKind::PlaneP;
    if (v == "plane-s") return IncidenceKind::PlaneS;
    throw ConfigError("incidence: unknown kind '" + v + "' (pointsource, plane, plane-p, plane-s)");
}

inline std::string incidence_name(IncidenceKind k) {
    switch (k) {
        case IncidenceKind::PointSource: return "pointsource";
        case IncidenceKind::PlaneElastic: return "plane";
        case IncidenceKind::PlaneP: return "plane-p";
        case IncidenceKind::PlaneS: return "plane-s";
    }
    return "?";
}

/// Applies one key = value setting. Keys are the long flag names without dashes.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    if (value.empty()) throw ConfigError(key + ": empty value");
    if (key == "geometry") {
        c.geometry = value;
    } else if (key == "axes") {
        const Vec3 a = parse_vec3(key, value);
        c.ellipsoid_axes = {a.x(), a.y(), a.z()};
    } else if (key == "omega") {
        c.medium.omega = parse_double(key, value);
    } else if (key == "lambda") {
        c.medium.lambda = parse_double(key, value);
    } else if (key == "mu") {
        c.medium.mu = parse_double(key, value);
    } else if (key == "n") {
        c.n.clear();
        for (const auto& p : split(value, ',')) c.n.push_back(parse_int(key, p));
    } else if (key == "nprime") {
        c.nprime = parse_int(key, value);
    } else if (key == "mode") {
        c.mode = parse_mode(value);
    } else if (key == "incidence") {
        c.incidence = parse_incidence(value);
    } else if (key == "direction") {
        c.direction = parse_vec3(key, value);
    } else if (key == "polarization") {
        c.polarization = parse_vec3(key, value);
    } else if (key == "source") {
        c.source = parse_vec3(key, value);
    } else if (key == "amplitude") {
        c.amplitude = parse_double(key, value);
    } else if (key == "obs-grid") {
        const auto parts = split(value, 'x');
        if (parts.size() != 2) throw ConfigError("obs-grid: expected THETAxPHI, e.g. 26x50");
        c.grid.n_theta = parse_int(key, parts[0]);
        c.grid.n_phi = parse_int(key, parts[1]);
    } else if (key == "out") {
        c.out = value;
    } else if (key == "coefficients") {
        c.coefficients = value;
    } else if (key == "cache-dir") {
        c.cache_dir = value;
    } else if (key == "threads") {
        c.threads = parse_int(key, value);
    } else if (key == "reference-n") {
        c.reference_n = parse_int(key, value);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

/// Flat key = value text; '#' starts a comment. Errors carry the line number.
inline void parse_config(std::istream& in, RunConfig& c, const std::string& origin = "config") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    RunConfig c;
    parse_config(in, c, path);
    return c;
}

/// One pipeline run: assemble, solve, far field.
struct RunResult {
    int n = 0;
    HarmonicCoefficients coefficients;
    FarField farfield;
    double residual = 0.0;
    double t_coe = 0.0;  // assembly seconds
    double t_sol = 0.0;  // solve seconds
};

inline RunResult run_pipeline(const RunConfig& c, int n) {
    using clock = std::chrono::steady_clock;
    const Surface surface = c.make_surface();
    const IncidentField inc = c.make_incident();
    RunResult r;
    r.n = n;
    const auto t0 = clock::now();
    const AssemblyContext ctx(surface, c.medium, n, c.nprime, c.threads);
    const BlockSystem sys = assemble_system(ctx, inc);
    const auto t1 = clock::now();
    SolveReport rep;
    r.coefficients = solve(sys, &rep);
    const auto t2 = clock::now();
    r.residual = rep.residual;
    r.t_coe = std::chrono::duration<double>(t1 - t0).count();
    r.t_sol = std::chrono::duration<double>(t2 - t1).count();
    r.farfield = farfield_from_densities(r.coefficients, surface, c.medium, c.grid, c.threads);
    return r;
}

struct TableRow {
    int n = 0;
    double error = 0.0;
    double t_coe = 0.0;
    double t_sol = 0.0;
};

inline bool monotone_decreasing(const std::vector<TableRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].error < rows[i - 1].error)) return false;
    return true;
}

/// Human-readable table to `text` and CSV to `csv` (either may be null).
inline void emit_convergence_table(const std::vector<TableRow>& rows, const std::string& label, std::ostream* text,
                                   std::ostream* csv) {
    if (rows.empty()) throw ConfigError("convergence table needs at least one row");
    const bool mono = monotone_decreasing(rows);
    if (text) {
        *text << std::setw(5) << "n" << std::setw(16) << label << std::setw(12) << "T_coe[s]" << std::setw(12)
              << "T_sol[s]" << '\n';
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const bool bad = i > 0 && !(rows[i].error < rows[i - 1].error);
            *text << std::setw(5) << rows[i].n << std::setw(16) << std::scientific << std::setprecision(4)
                  << rows[i].error << std::fixed << std::setprecision(3) << std::setw(12) << rows[i].t_coe
                  << std::setw(12) << rows[i].t_sol << (bad ? "  <- not decreasing" : "") << '\n';
            text->unsetf(std::ios::floatfield);
        }
        *text << "monotone: " << (mono ? "yes" : "no") << '\n';
    }
    if (csv) {
        *csv << "n," << label << ",t_coe,t_sol\n" << std::setprecision(10);
        for (const auto& r : rows) *csv << r.n << ',' << r.error << ',' << r.t_coe << ',' << r.t_sol << '\n';
    }
}

// Far-field cache for the self-convergence reference.

inline std::string reference_key(const RunConfig& c) {
    std::ostringstream k;
    k << std::setprecision(17) << c.geometry;
    if (c.geometry == "ellipsoid")
        k << '(' << c.ellipsoid_axes[0] << ',' << c.ellipsoid_axes[1] << ',' << c.ellipsoid_axes[2] << ')';
    k << " omega=" << c.medium.omega << " lambda=" << c.medium.lambda << " mu=" << c.medium.mu
      << " nstar=" << c.reference_n << " nprime=" << (c.nprime < 0 ? 2 * c.reference_n + 1 : c.nprime) << ' '
      << incidence_name(c.incidence) << " d=" << c.direction.transpose() << " p=" << c.polarization.transpose()
      << " amp=" << c.amplitude << " grid=" << c.grid.n_theta << 'x' << c.grid.n_phi;
    return k.str();
}

inline std::optional<FarField> read_cached_farfield(const std::string& path, const std::string& key,
                                                    const ObservationGrid& grid) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != "# " + key) return std::nullopt;
    std::getline(in, line);  // header
    FarField ff = FarField::zero(grid);
    for (int i = 0; i < grid.size(); ++i) {
        if (!std::getline(in, line)) return std::nullopt;
        const auto parts = detail::split(line, ',');
        if (parts.size() != 14) return std::nullopt;
        for (int c = 0; c < 3; ++c) {
            ff.vp[std::size_t(i)](c) = {std::stod(parts[std::size_t(2 + 2 * c)]), std::stod(parts[std::size_t(3 + 2 * c)])};
            ff.vs[std::size_t(i)](c) = {std::stod(parts[std::size_t(8 + 2 * c)]), std::stod(parts[std::size_t(9 + 2 * c)])};
        }
    }
    return ff;
}

inline FarField reference_farfield(const RunConfig& c, std::ostream* log) {
    namespace fs = std::filesystem;
    const std::string key = reference_key(c);
    const fs::path dir(c.cache_dir);
    const fs::path file = dir / ("ref_" + std::to_string(std::hash<std::string>{}(key)) + ".csv");
    if (auto hit = read_cached_farfield(file.string(), key, c.grid)) {
        if (log) *log << "reference far field read from " << file.string() << '\n';
        return *hit;
    }
    if (log) *log << "computing reference far field at n* = " << c.reference_n << '\n';
    const RunResult r = run_pipeline(c, c.reference_n);
    fs::create_directories(dir);
    std::ofstream out(file);
    if (!out) throw Error("cannot write reference cache " + file.string());
    out << "# " << key << '\n';
    write_farfield_csv(r.farfield, out);
    return r.farfield;
}

inline std::vector<TableRow> error_table(const RunConfig& c, std::ostream* log) {
    std::vector<TableRow> rows;
    const bool exact = c.incidence == IncidenceKind::PointSource;
    std::optional<FarField> ref;
    if (exact) {
        FarField e = exact_pointsource_field(c.grid, c.medium, c.source, c.polarization);
        for (auto& v : e.vp) v *= c.amplitude;
        for (auto& v : e.vs) v *= c.amplitude;
        ref = std::move(e);
    } else {
        ref = reference_farfield(c, log);
    }
    for (int n : c.n) {
        const RunResult r = run_pipeline(c, n);
        rows.push_back({n, error_norms(r.farfield, *ref), r.t_coe, r.t_sol});
        if (log) *log << "n = " << n << " done\n";
    }
    return rows;
}

/// Executes the configured mode. Tables go to `text`; CSV goes to c.out ("-" is stdout).
inline int run(const RunConfig& c, std::ostream& text, std::ostream& log) {
    c.validate();
    std::ofstream file;
    std::ostream* csv = &text;
    if (c.out != "-") {
        file.open(c.out);
        if (!file) throw Error("cannot open " + c.out + " for writing");
        csv = &file;
    }
    if (c.mode == RunMode::Solve) {
        if (c.n.size() != 1) throw ConfigError("n: solve mode takes a single degree");
        const RunResult r = run_pipeline(c, c.n.front());
        log << "n = " << r.n << "  residual = " << r.residual << "  T_coe = " << r.t_coe << " s  T_sol = " << r.t_sol
            << " s\n";
        if (!c.coefficients.empty()) write_coefficients_csv(r.coefficients, c.coefficients);
        write_farfield_csv(r.farfield, *csv);
        return 0;
    }
    const std::vector<TableRow> rows = error_table(c, &log);
    const std::string label = c.incidence == IncidenceKind::PointSource ? "err_ps" : "err_pw";
    emit_convergence_table(rows, label, &text, c.out == "-" ? nullptr : csv);
    return 0;
}

}  // namespace elscat
