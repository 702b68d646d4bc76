#pragma once

// North-pole rotations T_x = D_P(phi) D_Q(theta) D_P(-phi) and the transport
// F(x-hat) that turns tangent vectors of the unit sphere into tangent vectors
// of the obstacle surface.

#include <cmath>
#include <vector>

#include "elscat/geometry.hpp"
#include "elscat/quadrature.hpp"
#include "elscat/sphharm.hpp"
#include "elscat/types.hpp"

namespace elscat {

inline Mat3 rot_z(double a) {
    Mat3 m;
    m << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return m;
}

inline Mat3 rot_q(double a) {
    Mat3 m;
    m << std::cos(a), 0.0, -std::sin(a), 0.0, 1.0, 0.0, std::sin(a), 0.0, std::cos(a);
    return m;
}

/// T with T p(theta, phi) = (0, 0, 1).
inline Mat3 rotation_to_pole(double theta, double phi) { return rot_z(phi) * rot_q(theta) * rot_z(-phi); }

inline Mat3 cross_matrix(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return m;
}

/// F for radial direction xhat and unit surface normal nu (Rodrigues form).
inline Mat3 transport_matrix(const Vec3& xhat, const Vec3& nu) {
    const double c = xhat.dot(nu);
    if (1.0 + c < 1e-8) throw FrameSingular("surface normal is antipodal to the radial direction");
    const Vec3 w = xhat.cross(nu);
    return c * Mat3::Identity() + cross_matrix(w) + w * w.transpose() / (1.0 + c);
}

inline Mat3 tangent_transport(const Surface& surface, double theta, double phi) {
    return transport_matrix(sphere_point(theta, phi), surface.frame(theta, phi).normal);
}

/// F and its partial derivatives in theta and phi at one parameter point.
struct TransportJet {
    Mat3 F;
    Mat3 dF_dtheta;
    Mat3 dF_dphi;
};

inline Mat3 transport_derivative(const Vec3& xhat, const Vec3& nu, const Vec3& dxhat, const Vec3& dnu) {
    const double c = xhat.dot(nu);
    const Vec3 w = xhat.cross(nu);
    const double dc = dxhat.dot(nu) + xhat.dot(dnu);
    const Vec3 dw = dxhat.cross(nu) + xhat.cross(dnu);
    const double inv = 1.0 / (1.0 + c);
    return dc * Mat3::Identity() + cross_matrix(dw) + (dw * w.transpose() + w * dw.transpose()) * inv -
           w * w.transpose() * (dc * inv * inv);
}

inline TransportJet tangent_transport_jet(const Surface& surface, double theta, double phi) {
    const SurfaceFrameDerivatives fd = surface.frame_derivatives(theta, phi);
    const Vec3 xhat = sphere_point(theta, phi);
    TransportJet j;
    j.F = transport_matrix(xhat, fd.frame.normal);
    j.dF_dtheta = transport_derivative(xhat, fd.frame.normal, e_theta(theta, phi), fd.dnormal_dtheta);
    j.dF_dphi = transport_derivative(xhat, fd.frame.normal, std::sin(theta) * e_phi(theta, phi), fd.dnormal_dphi);
    return j;
}

/// Z^{(k)}_{l,j}(p(theta, phi)); zero for l = 0.
inline CVec3 z_basis(const Surface& surface, int l, int j, int k, double theta, double phi) {
    if (l < 1) return CVec3::Zero();
    if (std::sin(theta) == 0.0) throw PoleEvaluation("z_basis evaluated at a pole");
    const LegendreColumn col(l, theta);
    const cplx e = std::exp(I * (double(j) * phi));
    const CVec3 v = e * (alpha_from_column(col, l, j, k, 1) * e_theta(theta, phi).cast<cplx>() +
                         alpha_from_column(col, l, j, k, 2) * e_phi(theta, phi).cast<cplx>());
    return tangent_transport(surface, theta, phi).cast<cplx>() * v;
}

/// Rotated inner nodes for one outer node x-hat = p(theta, phi).
struct RotationFrame {
    Mat3 T;
    Mat3 T_inv;
    std::vector<Vec3> points;                      // T^{-1} p(Theta_{s'}, Phi_{r'}), index s' * nphi + r'
    std::vector<std::pair<double, double>> angles;  // (Lambda, Xi) of each rotated node
};

inline RotationFrame rotation_frame(double theta, double phi, const SphericalQuadrature& inner) {
    RotationFrame f;
    f.T = rotation_to_pole(theta, phi);
    f.T_inv = f.T.transpose();
    const int ns = inner.n_theta();
    const int nr = inner.n_phi();
    f.points.reserve(static_cast<std::size_t>(ns * nr));
    f.angles.reserve(static_cast<std::size_t>(ns * nr));
    for (int s = 0; s < ns; ++s) {
        for (int r = 0; r < nr; ++r) {
            const Vec3 y = f.T_inv * sphere_point(inner.theta[s], inner.phi[r]);
            f.points.push_back(y);
            f.angles.push_back(spherical_angles(y));
        }
    }
    return f;
}

/// One RotationFrame per outer node, indexed s * nphi + r.
inline std::vector<RotationFrame> rotated_grid(const SphericalQuadrature& outer, const SphericalQuadrature& inner) {
    std::vector<RotationFrame> out;
    out.reserve(static_cast<std::size_t>(outer.n_theta() * outer.n_phi()));
    for (int s = 0; s < outer.n_theta(); ++s)
        for (int r = 0; r < outer.n_phi(); ++r) out.push_back(rotation_frame(outer.theta[s], outer.phi[r], inner));
    return out;
}

}  // namespace elscat
