#pragma once

// Incident elastic fields, the Kupradze tensor and the boundary data
// f1 = -nu . u^i, f2 = -nu x u^i.

#include <cmath>
#include <string>

#include "elscat/geometry.hpp"
#include "elscat/kernels.hpp"
#include "elscat/types.hpp"

namespace elscat {

/// Hessian of Phi(., y; kappa) at x: delta_ij f + d_i d_j g with d = x - y.
inline CMat3 hessian_fundamental_solution(const Vec3& x, const Vec3& y, double kappa) {
    const Vec3 d = x - y;
    const double r = d.norm();
    if (r == 0.0) throw CoincidentPoints("hessian_fundamental_solution at coincident points");
    const cplx e = std::exp(I * (kappa * r)) / (4.0 * pi);
    const double r2 = r * r, r3 = r2 * r;
    const cplx f = (I * (kappa * r) - 1.0) * e / r3;
    const cplx g = e * (-kappa * kappa / r3 - 3.0 * I * kappa / (r3 * r) + 3.0 / (r3 * r2));
    return f * CMat3::Identity() + g * (d * d.transpose()).cast<cplx>();
}

inline CMat3 green_tensor(const Vec3& x, const Vec3& y, const ElasticMedium& medium) {
    const auto [kp, ks] = wavenumbers(medium);
    const CMat3 hess = hessian_fundamental_solution(x, y, ks) - hessian_fundamental_solution(x, y, kp);
    return (fundamental_solution(x, y, ks) * CMat3::Identity() + hess / (ks * ks)) / medium.mu;
}

enum class IncidenceKind { PointSource, PlaneElastic, PlaneP, PlaneS };

struct IncidentField {
    IncidenceKind kind = IncidenceKind::PointSource;
    ElasticMedium medium;
    Vec3 source{0.0, 0.05, 0.0866};     // y0 for PointSource
    Vec3 direction{0.0, 0.0, 1.0};      // d for plane waves
    Vec3 polarization{1.0, 0.0, 0.0};   // p
    double amplitude = 1.0;

    static IncidentField point_source(const ElasticMedium& m, const Vec3& y0, const Vec3& p) {
        IncidentField f;
        f.kind = IncidenceKind::PointSource;
        f.medium = m;
        f.source = y0;
        f.polarization = p;
        return f;
    }
    static IncidentField plane(IncidenceKind kind, const ElasticMedium& m, const Vec3& d, const Vec3& p) {
        IncidentField f;
        f.kind = kind;
        f.medium = m;
        f.direction = d;
        f.polarization = p;
        f.validate();
        return f;
    }

    void validate() const {
        medium.validate();
        if (kind == IncidenceKind::PointSource) return;
        if (std::abs(direction.norm() - 1.0) > 1e-12) throw ConfigError("plane-wave direction must be a unit vector");
        if (kind == IncidenceKind::PlaneS && std::abs(direction.dot(polarization)) > 1e-12)
            throw ConfigError("shear plane wave needs polarization orthogonal to the direction");
    }

    /// u^i(x).
    CVec3 value(const Vec3& x) const {
        const auto [kp, ks] = wavenumbers(medium);
        const CVec3 d = direction.cast<cplx>();
        switch (kind) {
            case IncidenceKind::PointSource: {
                if ((x - source).norm() < 1e-10) throw SourceOnBoundary("point source lies on the boundary");
                return -amplitude * (green_tensor(x, source, medium) * polarization.cast<cplx>());
            }
            case IncidenceKind::PlaneP:
                return amplitude * std::exp(I * (kp * x.dot(direction))) * d;
            case IncidenceKind::PlaneS:
                return amplitude * std::exp(I * (ks * x.dot(direction))) *
                       direction.cross(polarization).cross(direction).cast<cplx>();
            case IncidenceKind::PlaneElastic: {
                const Vec3 shear = direction.cross(polarization).cross(direction);
                return amplitude * ((std::exp(I * (ks * x.dot(direction))) / medium.mu) * shear.cast<cplx>() +
                                    (std::exp(I * (kp * x.dot(direction))) * direction.dot(polarization) /
                                     (medium.lambda + 2.0 * medium.mu)) *
                                        d);
            }
        }
        return CVec3::Zero();
    }
};

struct BoundaryData {
    cplx f1;
    CVec3 f2;
};

inline BoundaryData incident_trace_at(const IncidentField& inc, const SurfaceFrame& frame) {
    const CVec3 u = inc.value(frame.point);
    const CVec3 nu = frame.normal.cast<cplx>();
    return {-dot(nu, u), -cross(nu, u)};
}

inline BoundaryData incident_trace(const IncidentField& inc, const Surface& surface, double theta, double phi) {
    return incident_trace_at(inc, surface.frame(theta, phi));
}

/// Exact far field of the scattered field G(., y0) p.
inline CVec3 exact_pointsource_farfield(const Vec3& xhat, const ElasticMedium& medium, const Vec3& y0, const Vec3& p) {
    const auto [kp, ks] = wavenumbers(medium);
    const Vec3 shear = xhat.cross(p).cross(xhat);
    const cplx es = std::exp(-I * (ks * xhat.dot(y0))) / (4.0 * pi * medium.mu);
    const cplx ep = std::exp(-I * (kp * xhat.dot(y0))) / (4.0 * pi * (medium.lambda + 2.0 * medium.mu));
    return es * shear.cast<cplx>() + (ep * xhat.dot(p)) * xhat.cast<cplx>();
}

}  // namespace elscat
