#pragma once

// Helmholtz fundamental solution and the kernels of S, K and M split as
// (1/|x-y|) k1 + k2 with k1, k2 smooth on an analytic surface.
//
// M kernel. With grad_x Phi = (x-y) h(r), h = (i kappa r - 1) e^{i kappa r}/(4 pi r^3), and a
// tangential density g(y) (so nu(x).g = (nu(x)-nu(y)).g),
//   2 nu(x) x (grad_x Phi x g) = 2 h r^2 [ (x-y)(nu(x)-nu(y))^T/r^2 - (nu(x).(x-y)/r^2) I ] g
// and 2 h r^2 = A1/r + A2 with
//   A1 = -(cos kr + kr sin kr)/(2 pi),   A2 = i (kappa cos kr - sin(kr)/r)/(2 pi).

#include <cmath>

#include "elscat/geometry.hpp"
#include "elscat/types.hpp"

namespace elscat {

struct ElasticMedium {
    double omega = pi;
    double lambda = 2.0;
    double mu = 1.0;

    void validate() const {
        if (!(mu > 0.0)) throw InvalidMedium("shear modulus mu must be positive");
        if (!(lambda + mu > 0.0)) throw InvalidMedium("lambda + mu must be positive");
        if (!(omega > 0.0)) throw InvalidMedium("omega must be positive");
    }
    double kappa_p() const { return omega / std::sqrt(lambda + 2.0 * mu); }
    double kappa_s() const { return omega / std::sqrt(mu); }
};

inline std::pair<double, double> wavenumbers(const ElasticMedium& m) {
    m.validate();
    return {m.kappa_p(), m.kappa_s()};
}

inline cplx fundamental_solution(const Vec3& x, const Vec3& y, double kappa) {
    const double r = (x - y).norm();
    if (r == 0.0) throw CoincidentPoints("fundamental_solution at coincident points");
    return std::exp(I * (kappa * r)) / (4.0 * pi * r);
}

inline CVec3 grad_fundamental_solution(const Vec3& x, const Vec3& y, double kappa) {
    const Vec3 d = x - y;
    const double r = d.norm();
    if (r == 0.0) throw CoincidentPoints("grad_fundamental_solution at coincident points");
    const cplx h = (I * (kappa * r) - 1.0) * std::exp(I * (kappa * r)) / (4.0 * pi * r * r * r);
    return h * d.cast<cplx>();
}

/// sin(kr)/r with the r -> 0 limit.
inline double sinc_r(double kappa, double r) { return r == 0.0 ? kappa : std::sin(kappa * r) / r; }

/// Split kernels of the parametrized S^p, S^s and K at one (x-hat, y-hat) pair.
struct ScalarKernels {
    cplx S1p, S2p, S1s, S2s, K1, K2;
    double R = 1.0;
};

/// Split parametrized M kernel; the full kernel is M1/|x-hat - y-hat| + M2.
struct MatrixKernels {
    CMat3 M1;
    CMat3 M2;
};

/// Geometry of one node pair as consumed by the kernel formulas.
struct PairGeometry {
    Vec3 d;            // q(x-hat) - q(y-hat)
    double r = 0.0;    // |d|
    double dhat = 0.0; // |x-hat - y-hat|
    double nx_d_over_r2 = 0.0; // nu(x).d / r^2
};

namespace detail {

inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a > pi) a -= 2.0 * pi;
    if (a < -pi) a += 2.0 * pi;
    return a;
}

// nu(x).(x-y)/|x-y|^2 from the second-order expansion of q about x-hat; used
// close to the diagonal where the direct quotient loses digits to cancellation.
inline double taylor_normal_ratio(const Surface& surface, double tx, double px, double ty, double py,
                                  const Vec3& nx) {
    const SurfaceJet j = surface.jet2(tx, px);
    double dt = ty - tx;
    double dp = wrap_angle(py - px);
    if (dt == 0.0 && dp == 0.0) dt = 1.0;  // exact diagonal: limit along e_theta
    const Vec3 lin = j.q_t * dt + j.q_p * dp;
    const Vec3 quad = 0.5 * (j.q_tt * dt * dt + 2.0 * j.q_tp * dt * dp + j.q_pp * dp * dp);
    return -nx.dot(quad) / lin.squaredNorm();
}

inline constexpr double taylor_radius = 1e-6;

inline PairGeometry pair_geometry(const Surface& surface, double tx, double px, double ty, double py,
                                  const SurfaceFrame& fx, const SurfaceFrame& fy) {
    PairGeometry g;
    g.d = fx.point - fy.point;
    g.r = g.d.norm();
    g.dhat = (sphere_point(tx, px) - sphere_point(ty, py)).norm();
    if (g.dhat >= taylor_radius)
        g.nx_d_over_r2 = fx.normal.dot(g.d) / (g.r * g.r);
    else
        g.nx_d_over_r2 = taylor_normal_ratio(surface, tx, px, ty, py, fx.normal);
    return g;
}

}  // namespace detail

/// Kernel core shared by the public API and the assembly loops.
inline ScalarKernels scalar_kernels_from(const PairGeometry& g, double jx, double jy, double kp, double ks) {
    ScalarKernels k;
    const double r = g.r;
    k.R = (r == 0.0) ? 1.0 : g.dhat / r;  // diagonal value of R is unused (multiplied by a finite weight)
    const double inv2pi = 1.0 / (2.0 * pi);
    const cplx s1p = std::cos(kp * r) * inv2pi;
    const cplx s2p = I * sinc_r(kp, r) * inv2pi;
    const cplx s1s = std::cos(ks * r) * inv2pi;
    const cplx s2s = I * sinc_r(ks, r) * inv2pi;
    k.S1p = k.R * s1p * jy;
    k.S2p = s2p * jy;
    k.S1s = k.R * s1s * jy;
    k.S2s = s2s * jy;
    const double rho = g.nx_d_over_r2;
    const cplx k1 = -rho * s1p + I * kp * (rho * r * r) * s2p;
    const cplx k2 = -rho * (s2p - I * kp * s1p);
    k.K1 = k.R * k1 * jx * jy;
    k.K2 = k2 * jx * jy;
    return k;
}

inline MatrixKernels matrix_kernels_from(const PairGeometry& g, const Vec3& nx, const Vec3& ny, double jx, double jy,
                                         double ks) {
    const double r = g.r;
    const double R = (r == 0.0) ? 1.0 : g.dhat / r;
    const double kr = ks * r;
    const double a1 = -(std::cos(kr) + kr * std::sin(kr)) / (2.0 * pi);
    const cplx a2 = I * (ks * std::cos(kr) - sinc_r(ks, r)) / (2.0 * pi);
    const Mat3 B = (r == 0.0 ? Mat3::Zero() : Mat3(g.d * (nx - ny).transpose() / (r * r))) -
                   g.nx_d_over_r2 * Mat3::Identity();
    MatrixKernels m;
    m.M1 = (R * a1 * jx * jy) * B.cast<cplx>();
    m.M2 = (a2 * jx * jy) * B.cast<cplx>();
    return m;
}

inline ScalarKernels split_kernels_scalar(const Surface& surface, const ElasticMedium& medium, double tx, double px,
                                          double ty, double py) {
    const auto [kp, ks] = wavenumbers(medium);
    const SurfaceFrame fx = surface.frame(tx, px);
    const SurfaceFrame fy = surface.frame(ty, py);
    const PairGeometry g = detail::pair_geometry(surface, tx, px, ty, py, fx, fy);
    return scalar_kernels_from(g, fx.jacobian, fy.jacobian, kp, ks);
}

inline MatrixKernels split_kernels_m(const Surface& surface, const ElasticMedium& medium, double tx, double px,
                                     double ty, double py) {
    const auto [kp, ks] = wavenumbers(medium);
    (void)kp;
    const SurfaceFrame fx = surface.frame(tx, px);
    const SurfaceFrame fy = surface.frame(ty, py);
    const PairGeometry g = detail::pair_geometry(surface, tx, px, ty, py, fx, fy);
    return matrix_kernels_from(g, fx.normal, fy.normal, fx.jacobian, fy.jacobian, ks);
}

}  // namespace elscat
