#pragma once

// Dense solve of the block system and pointwise synthesis of the densities.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/LU>

#include "elscat/assembly.hpp"
#include "elscat/rotation.hpp"
#include "elscat/sphharm.hpp"

namespace elscat {

/// w_{lj} in lj_index layout; W[k-1] indexed by lj_index(l, j) - 1 (l >= 1).
struct HarmonicCoefficients {
    int n = 0;
    CVector w;
    std::array<CVector, 2> W;

    static HarmonicCoefficients zero(int n) {
        HarmonicCoefficients c;
        c.n = n;
        c.w = CVector::Zero(scalar_dim(n));
        c.W = {CVector::Zero(tangential_dim(n)), CVector::Zero(tangential_dim(n))};
        return c;
    }

    static HarmonicCoefficients from_vector(int n, const CVector& x) {
        if (x.size() != system_dim(n)) throw ShapeMismatch("coefficient vector does not match degree");
        HarmonicCoefficients c;
        c.n = n;
        const int ny = scalar_dim(n), nz = tangential_dim(n);
        c.w = x.head(ny);
        c.W = {x.segment(ny, nz), x.segment(ny + nz, nz)};
        return c;
    }

    CVector stacked() const {
        CVector x(system_dim(n));
        x << w, W[0], W[1];
        return x;
    }
};

struct SolveReport {
    double residual = 0.0;  // |Ax - b| / |b| (0 when b = 0)
    bool refined = false;
};

inline double relative_residual(const CMatrix& A, const CVector& x, const CVector& b) {
    const double nb = b.norm();
    const double nr = (A * x - b).norm();
    return nb == 0.0 ? nr : nr / nb;
}

inline HarmonicCoefficients solve(const BlockSystem& sys, SolveReport* report = nullptr) {
    if (sys.A.rows() != sys.A.cols()) throw ShapeMismatch("system matrix is not square");
    if (sys.b.size() != sys.A.rows()) throw ShapeMismatch("right-hand side does not match the matrix");
    if (!sys.A.allFinite() || !sys.b.allFinite()) throw SingularSystem("system has non-finite entries");
    const Eigen::PartialPivLU<CMatrix> lu(sys.A);
    // Partial pivoting does not report rank; a vanishing pivot relative to the
    // largest entry is taken as numerical rank deficiency.
    const CMatrix& LU = lu.matrixLU();
    const double scale = sys.A.cwiseAbs().maxCoeff();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < LU.rows(); ++i) min_pivot = std::min(min_pivot, std::abs(LU(i, i)));
    if (scale == 0.0 || min_pivot <= scale * 1e-14 * double(LU.rows()))
        throw SingularSystem("LU factorization found a (numerically) zero pivot");
    CVector x = lu.solve(sys.b);
    double res = relative_residual(sys.A, x, sys.b);
    bool refined = false;
    if (res > 1e-10) {
        x += lu.solve(CVector(sys.b - sys.A * x));
        res = relative_residual(sys.A, x, sys.b);
        refined = true;
    }
    if (!x.allFinite()) throw SingularSystem("solution is not finite");
    if (report) *report = {res, refined};
    return HarmonicCoefficients::from_vector(sys.n, x);
}

/// (g1, g2) at q(theta, phi) from the expansions in Y and Z^{(k)}.
inline std::pair<cplx, CVec3> evaluate_density(const HarmonicCoefficients& c, const Surface& surface, double theta,
                                               double phi) {
    const int n = c.n;
    const LegendreColumn col(n, theta);
    cplx g1 = 0.0;
    for (int l = 0; l <= n; ++l)
        for (int j = -l; j <= l; ++j)
            g1 += c.w(lj_index(l, j)) * sign_phase(j) * col.p(l, std::abs(j)) * std::exp(I * (double(j) * phi));
    bool nonzero = false;
    for (const auto& v : c.W) nonzero = nonzero || v.cwiseAbs().maxCoeff() > 0.0;
    if (!nonzero || n < 1) return {g1, CVec3::Zero()};
    if (std::sin(theta) == 0.0) throw PoleEvaluation("tangential density evaluated at a pole");
    std::array<cplx, 2> comp{0.0, 0.0};  // components along e_theta, e_phi
    for (int l = 1; l <= n; ++l)
        for (int j = -l; j <= l; ++j) {
            const cplx e = std::exp(I * (double(j) * phi));
            for (int k = 0; k < 2; ++k)
                for (int d = 0; d < 2; ++d)
                    comp[d] += c.W[k](lj_index(l, j) - 1) * alpha_from_column(col, l, j, k + 1, d + 1) * e;
        }
    const CVec3 v = comp[0] * e_theta(theta, phi).cast<cplx>() + comp[1] * e_phi(theta, phi).cast<cplx>();
    return {g1, tangent_transport(surface, theta, phi).cast<cplx>() * v};
}

/// CSV with columns l, j, k, re, im; k = 0 marks the scalar density.
inline void write_coefficients_csv(const HarmonicCoefficients& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "l,j,k,re,im\n" << std::setprecision(17);
    for (int l = 0; l <= c.n; ++l)
        for (int j = -l; j <= l; ++j) {
            const cplx v = c.w(lj_index(l, j));
            out << l << ',' << j << ",0," << v.real() << ',' << v.imag() << '\n';
        }
    for (int k = 0; k < 2; ++k)
        for (int l = 1; l <= c.n; ++l)
            for (int j = -l; j <= l; ++j) {
                const cplx v = c.W[k](lj_index(l, j) - 1);
                out << l << ',' << j << ',' << k + 1 << ',' << v.real() << ',' << v.imag() << '\n';
            }
}

}  // namespace elscat
