#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace elscat {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the CLI in particular) can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PoleEvaluation : Error {
    using Error::Error;
};
struct FrameSingular : Error {
    using Error::Error;
};
struct InvalidMedium : Error {
    using Error::Error;
};
struct CoincidentPoints : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct SourceOnBoundary : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

/// Bilinear cross product. Eigen's cross() conjugates for complex scalars.
template <class A, class B>
auto cross(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    using S = decltype(a(0) * b(0));
    return Eigen::Matrix<S, 3, 1>(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

/// Bilinear dot product (no conjugation).
template <class A, class B>
auto dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

/// Point on the unit sphere for spherical angles (theta, phi).
inline Vec3 sphere_point(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline Vec3 e_theta(double theta, double phi) {
    return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}

inline Vec3 e_phi(double /*theta*/, double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

/// Spherical angles of a (not necessarily normalized) nonzero vector; phi in [0, 2 pi).
inline std::pair<double, double> spherical_angles(const Vec3& x) {
    const double theta = std::atan2(std::hypot(x.x(), x.y()), x.z());
    double phi = std::atan2(x.y(), x.x());
    if (phi < 0.0) phi += 2.0 * pi;
    return {theta, phi};
}

}  // namespace elscat
