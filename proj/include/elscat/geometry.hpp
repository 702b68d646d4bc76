#pragma once

// Star-shaped obstacle boundaries given as images q(x-hat) of the unit sphere.
//
// Built-in shapes are written once as templates over the scalar type and are
// differentiated with nested dual numbers, so the tangent vectors and the
// normal derivatives are exact to rounding. A custom surface provides the same
// data (point plus first and second partials in theta and phi) directly.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "elscat/dual.hpp"
#include "elscat/types.hpp"

namespace elscat {

enum class SurfaceKind { Sphere, Ellipsoid, Cushion, Bean, Custom };

/// q and its partials with respect to (theta, phi) at one parameter point.
struct SurfaceJet {
    Vec3 q = Vec3::Zero();
    Vec3 q_t = Vec3::Zero();
    Vec3 q_p = Vec3::Zero();
    Vec3 q_tt = Vec3::Zero();
    Vec3 q_tp = Vec3::Zero();
    Vec3 q_pp = Vec3::Zero();
};

/// Frame quantities at q(p(theta, phi)): t1 = dq/dtheta, t2 = (1/sin theta) dq/dphi,
/// jacobian = |t1 x t2|, normal = (t1 x t2)/jacobian.
struct SurfaceFrame {
    Vec3 point;
    Vec3 t1;
    Vec3 t2;
    Vec3 normal;
    double jacobian = 0.0;
};

/// Frame plus the parametric derivatives of the unit normal.
struct SurfaceFrameDerivatives {
    SurfaceFrame frame;
    Vec3 dnormal_dtheta;
    Vec3 dnormal_dphi;
};

namespace shapes {

struct UnitSphere {
    template <class S>
    std::array<S, 3> operator()(const S& t, const S& p) const {
        using std::cos;
        using std::sin;
        return {sin(t) * cos(p), sin(t) * sin(p), cos(t)};
    }
};

struct Ellipsoid {
    double a = 1.0, b = 0.75, c = 0.5;
    template <class S>
    std::array<S, 3> operator()(const S& t, const S& p) const {
        using std::cos;
        using std::sin;
        return {a * (sin(t) * cos(p)), b * (sin(t) * sin(p)), c * cos(t)};
    }
};

// Radial graph r(theta, phi) x-hat with r^2 = 0.27 + 0.065 (cos 2phi - 1)(cos 4theta - 1).
struct Cushion {
    template <class S>
    std::array<S, 3> operator()(const S& t, const S& p) const {
        using std::cos;
        using std::sin;
        using std::sqrt;
        const S r = sqrt(0.27 + 0.065 * ((cos(2.0 * p) - 1.0) * (cos(4.0 * t) - 1.0)));
        return {r * (sin(t) * cos(p)), r * (sin(t) * sin(p)), r * cos(t)};
    }
};

// Each slice x3 = cos(theta) of the implicit bean surface is the ellipse
// x1^2/a^2 + (x2 + 0.3 cos(pi x3))^2/b^2 = sin^2(theta), traced affinely in phi.
struct Bean {
    template <class S>
    std::array<S, 3> operator()(const S& t, const S& p) const {
        using std::cos;
        using std::sin;
        using std::sqrt;
        const S x3 = cos(t);
        const S cpx = cos(pi * x3);
        const S a = 0.8 * sqrt(1.0 - 0.1 * cpx);
        const S b = 0.8 * sqrt(1.0 - 0.4 * cpx);
        return {a * (sin(t) * cos(p)), b * (sin(t) * sin(p)) - 0.3 * cpx, x3};
    }
};

}  // namespace shapes

namespace detail {

template <class Map>
SurfaceJet jet_second_order(const Map& map, double theta, double phi) {
    using D1 = Dual<double, 2>;
    using D2 = Dual<D1, 2>;
    D2 t(D1::variable(theta, 0), {D1(1.0), D1(0.0)});
    D2 p(D1::variable(phi, 1), {D1(0.0), D1(1.0)});
    const auto x = map(t, p);
    SurfaceJet j;
    for (int k = 0; k < 3; ++k) {
        j.q[k] = x[k].v.v;
        j.q_t[k] = x[k].d[0].v;
        j.q_p[k] = x[k].d[1].v;
        j.q_tt[k] = x[k].d[0].d[0];
        j.q_tp[k] = x[k].d[0].d[1];
        j.q_pp[k] = x[k].d[1].d[1];
    }
    return j;
}

template <class Map>
SurfaceJet jet_first_order(const Map& map, double theta, double phi) {
    using D1 = Dual<double, 2>;
    const auto x = map(D1::variable(theta, 0), D1::variable(phi, 1));
    SurfaceJet j;
    for (int k = 0; k < 3; ++k) {
        j.q[k] = x[k].v;
        j.q_t[k] = x[k].d[0];
        j.q_p[k] = x[k].d[1];
    }
    return j;
}

}  // namespace detail

class Surface {
public:
    using JetFn = std::function<SurfaceJet(double theta, double phi)>;

    static Surface sphere() { return from_map(SurfaceKind::Sphere, "sphere", shapes::UnitSphere{}); }
    static Surface ellipsoid(double a = 1.0, double b = 0.75, double c = 0.5) {
        return from_map(SurfaceKind::Ellipsoid, "ellipsoid", shapes::Ellipsoid{a, b, c});
    }
    static Surface cushion() { return from_map(SurfaceKind::Cushion, "cushion", shapes::Cushion{}); }
    static Surface bean() { return from_map(SurfaceKind::Bean, "bean", shapes::Bean{}); }

    /// Registers a user surface. `jet` must return q and its first and second
    /// partials in (theta, phi). Smoothness is the caller's responsibility.
    static Surface custom(std::string name, JetFn jet) {
        Surface s;
        s.kind_ = SurfaceKind::Custom;
        s.name_ = std::move(name);
        s.first_ = jet;
        s.second_ = std::move(jet);
        return s;
    }

    template <class Map>
    static Surface from_map(SurfaceKind kind, std::string name, Map map) {
        Surface s;
        s.kind_ = kind;
        s.name_ = std::move(name);
        s.first_ = [map](double t, double p) { return detail::jet_first_order(map, t, p); };
        s.second_ = [map](double t, double p) { return detail::jet_second_order(map, t, p); };
        return s;
    }

    SurfaceKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    Vec3 point(double theta, double phi) const { return first_(theta, phi).q; }

    /// Point and first partials (second partials left zero for built-ins).
    SurfaceJet jet1(double theta, double phi) const { return first_(theta, phi); }
    SurfaceJet jet2(double theta, double phi) const { return second_(theta, phi); }

    SurfaceFrame frame(double theta, double phi) const {
        return frame_from_jet(jet1(theta, phi), theta);
    }

    SurfaceFrameDerivatives frame_derivatives(double theta, double phi) const {
        const SurfaceJet j = jet2(theta, phi);
        SurfaceFrameDerivatives out;
        out.frame = frame_from_jet(j, theta);
        // normal = n/|n| with n = q_t x q_p; differentiate the unnormalized normal.
        const Vec3 n = j.q_t.cross(j.q_p);
        const double len = n.norm();
        const Vec3 dn_t = j.q_tt.cross(j.q_p) + j.q_t.cross(j.q_tp);
        const Vec3 dn_p = j.q_tp.cross(j.q_p) + j.q_t.cross(j.q_pp);
        const Vec3& nu = out.frame.normal;
        out.dnormal_dtheta = (dn_t - nu * nu.dot(dn_t)) / len;
        out.dnormal_dphi = (dn_p - nu * nu.dot(dn_p)) / len;
        return out;
    }

    static SurfaceFrame frame_from_jet(const SurfaceJet& j, double theta) {
        const double st = std::sin(theta);
        if (st == 0.0) throw PoleEvaluation("surface frame requested at a pole (sin theta = 0)");
        SurfaceFrame f;
        f.point = j.q;
        f.t1 = j.q_t;
        f.t2 = j.q_p / st;
        const Vec3 n = f.t1.cross(f.t2);
        f.jacobian = n.norm();
        f.normal = n / f.jacobian;
        return f;
    }

private:
    SurfaceKind kind_ = SurfaceKind::Sphere;
    std::string name_;
    JetFn first_;
    JetFn second_;
};

/// [D q] = t1 (x) e_theta + t2 (x) e_phi; maps T_x S^2 onto the tangent plane of the surface.
inline Mat3 dsq_matrix(const Surface& surface, double theta, double phi) {
    const SurfaceFrame f = surface.frame(theta, phi);
    return f.t1 * e_theta(theta, phi).transpose() + f.t2 * e_phi(theta, phi).transpose();
}

/// Frame tuple at (theta, phi); throws PoleEvaluation when sin(theta) = 0.
inline SurfaceFrame surface_frame(const Surface& surface, double theta, double phi) {
    return surface.frame(theta, phi);
}

}  // namespace elscat
