// Command-line driver: elscat [--config FILE] [overrides...]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "elscat/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral boundary integral solver for elastic scattering by a rigid obstacle"};
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value config file");

    // Every override is kept as text and applied through the same path as config entries.
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"geometry", "sphere | ellipsoid | cushion | bean"},
        {"axes", "ellipsoid semi-axes a,b,c"},
        {"omega", "angular frequency"},
        {"lambda", "Lame parameter lambda"},
        {"mu", "Lame parameter mu"},
        {"n", "ansatz degree, or a comma list for table modes"},
        {"nprime", "inner quadrature degree (default 2n+1)"},
        {"mode", "solve | pointsource-test | planewave-selfconvergence | convergence-table"},
        {"incidence", "pointsource | plane | plane-p | plane-s"},
        {"direction", "plane-wave direction d1,d2,d3"},
        {"polarization", "polarization p1,p2,p3"},
        {"source", "point-source location y1,y2,y3"},
        {"amplitude", "incident amplitude"},
        {"obs-grid", "observation grid THETAxPHI"},
        {"out", "CSV output path ('-' for stdout)"},
        {"coefficients", "coefficient CSV path (solve mode)"},
        {"cache-dir", "reference far-field cache directory"},
        {"threads", "assembly threads"},
        {"reference-n", "reference degree n* for self-convergence"},
    };
    std::vector<std::string> values(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) app.add_option("--" + keys[i].first, values[i], keys[i].second);

    CLI11_PARSE(app, argc, argv);

    try {
        elscat::RunConfig cfg = config_path.empty() ? elscat::RunConfig{} : elscat::load_config(config_path);
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (app.count("--" + keys[i].first) > 0) elscat::apply_setting(cfg, keys[i].first, values[i]);
        return elscat::run(cfg, std::cout, std::cerr);
    } catch (const elscat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const elscat::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
