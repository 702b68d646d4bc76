#pragma once

// Far fields of the scattered wave from the solved densities:
//   phi_inf(x) = 1/(4 pi) int e^{-i kp x.y} g1 ds,  psi_inf(x) = 1/(4 pi) x cross int g2 cross x e^{-i ks x.y} ds,
//   v_p = i kp phi_inf x,  v_s = i ks x cross psi_inf.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "elscat/incident.hpp"
#include "elscat/parallel.hpp"
#include "elscat/quadrature.hpp"
#include "elscat/solver.hpp"

namespace elscat {

/// Product grid theta_i = (i + 1/2) pi / n_theta, phi_k = 2 pi k / n_phi.
struct ObservationGrid {
    int n_theta = 26;
    int n_phi = 50;

    int size() const { return n_theta * n_phi; }
    double theta(int i) const { return (i + 0.5) * pi / n_theta; }
    double phi(int k) const { return 2.0 * pi * k / n_phi; }
    Vec3 direction(int idx) const { return sphere_point(theta(idx / n_phi), phi(idx % n_phi)); }
    bool operator==(const ObservationGrid&) const = default;
};

struct FarField {
    ObservationGrid grid;
    std::vector<CVec3> vp;  // index i * n_phi + k
    std::vector<CVec3> vs;

    static FarField zero(const ObservationGrid& g) {
        return {g, std::vector<CVec3>(std::size_t(g.size()), CVec3::Zero()),
                std::vector<CVec3>(std::size_t(g.size()), CVec3::Zero())};
    }
    CVec3 total(int idx) const { return vp[std::size_t(idx)] + vs[std::size_t(idx)]; }
};

/// Density samples on the order-(n+1) rule: point, jacobian, g1, g2 per node.
struct DensitySamples {
    SphericalQuadrature rule;
    std::vector<Vec3> point;
    std::vector<double> weight;  // nu_s mu J
    std::vector<cplx> g1;
    std::vector<CVec3> g2;
};

inline DensitySamples sample_densities(const HarmonicCoefficients& c, const Surface& surface) {
    DensitySamples d;
    d.rule = build_rule(c.n + 1);
    const int ns = d.rule.n_theta(), nr = d.rule.n_phi();
    d.point.resize(std::size_t(ns * nr));
    d.weight.resize(d.point.size());
    d.g1.resize(d.point.size());
    d.g2.resize(d.point.size());
    for (int s = 0; s < ns; ++s)
        for (int r = 0; r < nr; ++r) {
            const auto i = std::size_t(s * nr + r);
            const SurfaceFrame f = surface.frame(d.rule.theta[s], d.rule.phi[r]);
            d.point[i] = f.point;
            d.weight[i] = d.rule.weight[s] * d.rule.mu * f.jacobian;
            std::tie(d.g1[i], d.g2[i]) = evaluate_density(c, surface, d.rule.theta[s], d.rule.phi[r]);
        }
    return d;
}

inline FarField farfield_from_densities(const HarmonicCoefficients& c, const Surface& surface,
                                        const ElasticMedium& medium, const ObservationGrid& grid, int threads = 1) {
    const auto [kp, ks] = wavenumbers(medium);
    const DensitySamples d = sample_densities(c, surface);
    FarField ff = FarField::zero(grid);
    parallel_for(0, grid.size(), threads, [&](std::ptrdiff_t idx) {
        const Vec3 x = grid.direction(int(idx));
        cplx phi_inf = 0.0;
        CVec3 a = CVec3::Zero();
        for (std::size_t i = 0; i < d.point.size(); ++i) {
            const double xy = x.dot(d.point[i]);
            phi_inf += d.weight[i] * std::exp(-I * (kp * xy)) * d.g1[i];
            a += (d.weight[i] * std::exp(-I * (ks * xy))) * d.g2[i];
        }
        phi_inf /= 4.0 * pi;
        a /= 4.0 * pi;
        const CVec3 xc = x.cast<cplx>();
        const CVec3 psi = cross(xc, cross(a, xc));
        ff.vp[std::size_t(idx)] = (I * kp * phi_inf) * xc;
        ff.vs[std::size_t(idx)] = (I * ks) * cross(xc, psi);
    });
    return ff;
}

/// Exact point-source far field sampled on a grid, split into radial and tangential parts.
inline FarField exact_pointsource_field(const ObservationGrid& grid, const ElasticMedium& medium, const Vec3& y0,
                                        const Vec3& p) {
    FarField ff = FarField::zero(grid);
    for (int idx = 0; idx < grid.size(); ++idx) {
        const Vec3 x = grid.direction(idx);
        const CVec3 v = exact_pointsource_farfield(x, medium, y0, p);
        const CVec3 xc = x.cast<cplx>();
        const cplx radial = dot(xc, v);
        ff.vp[std::size_t(idx)] = radial * xc;
        ff.vs[std::size_t(idx)] = v - radial * xc;
    }
    return ff;
}

/// max over the grid of |total computed - total reference|.
inline double error_norms(const FarField& computed, const FarField& reference) {
    if (!(computed.grid == reference.grid) || computed.vp.size() != reference.vp.size() ||
        computed.vs.size() != reference.vs.size())
        throw GridMismatch("far fields live on different observation grids");
    double e = 0.0;
    for (int i = 0; i < computed.grid.size(); ++i) e = std::max(e, (computed.total(i) - reference.total(i)).norm());
    return e;
}

/// Worst |x cross v_p| and |x . v_s| over the grid.
inline std::pair<double, double> structure_defects(const FarField& ff) {
    double radial = 0.0, tangential = 0.0;
    for (int i = 0; i < ff.grid.size(); ++i) {
        const CVec3 x = ff.grid.direction(i).cast<cplx>();
        radial = std::max(radial, cross(x, ff.vp[std::size_t(i)]).norm());
        tangential = std::max(tangential, std::abs(dot(x, ff.vs[std::size_t(i)])));
    }
    return {radial, tangential};
}

/// CSV: theta, phi, then re/im of the three components of v_p and v_s.
inline void write_farfield_csv(const FarField& ff, std::ostream& out) {
    out << "theta,phi";
    for (const char* part : {"vp", "vs"})
        for (const char* c : {"x", "y", "z"}) out << ',' << part << c << "_re," << part << c << "_im";
    out << '\n' << std::setprecision(17);
    for (int i = 0; i < ff.grid.size(); ++i) {
        out << ff.grid.theta(i / ff.grid.n_phi) << ',' << ff.grid.phi(i % ff.grid.n_phi);
        for (const auto* v : {&ff.vp[std::size_t(i)], &ff.vs[std::size_t(i)]})
            for (int c = 0; c < 3; ++c) out << ',' << (*v)(c).real() << ',' << (*v)(c).imag();
        out << '\n';
    }
}

inline void write_farfield_csv(const FarField& ff, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_farfield_csv(ff, out);
}

}  // namespace elscat
