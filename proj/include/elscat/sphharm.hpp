#pragma once

// Orthonormal spherical harmonics Y_{l,j} = c_l^j P_l^{|j|}(cos theta) e^{ij phi},
// their tangential gradients, the transported tangential basis Z^{(k)}, and the
// Wigner d(pi/2) tables used to rotate harmonics to the north pole.
//
// P_l^m carries no Condon-Shortley phase; the (-1)^j factor for j > 0 lives in
// c_l^j. All Legendre values are kept normalized (scaled by |c_l^j|) so the
// recurrences never overflow.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "elscat/geometry.hpp"
#include "elscat/types.hpp"

namespace elscat {

inline int tri_index(int l, int m) { return l * (l + 1) / 2 + m; }

/// Position of (l, j) in the lexicographic scalar layout (l, then j = -l..l).
inline int lj_index(int l, int j) { return l * l + l + j; }

inline double sign_phase(int j) { return (j > 0 && (j & 1)) ? -1.0 : 1.0; }

/// Normalized associated Legendre values |c_l^m| P_l^m(cos theta) and their
/// first two theta-derivatives for 0 <= m <= l <= lmax at a single angle.
class LegendreColumn {
public:
    LegendreColumn() = default;
    LegendreColumn(int lmax, double theta) : lmax_(lmax), theta_(theta) {
        const double x = std::cos(theta);
        const double s = std::sin(theta);
        const int top = lmax + 1;
        const std::size_t count = static_cast<std::size_t>(tri_index(top, top) + 1);
        p_.assign(count, 0.0);
        dp_.assign(count, 0.0);
        d2p_.assign(count, 0.0);

        // Work one degree beyond lmax for the theta-derivative identity.
        double pmm = 1.0 / std::sqrt(4.0 * pi);
        for (int m = 0; m <= top; ++m) {
            if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
            p_[tri_index(m, m)] = pmm;
            if (m + 1 <= top) p_[tri_index(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
            for (int l = m + 2; l <= top; ++l) {
                const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
                const double a1 = std::sqrt((4.0 * (l - 1) * (l - 1) - 1.0) /
                                            (double(l - 1) * (l - 1) - double(m) * m));
                p_[tri_index(l, m)] = a * (x * p_[tri_index(l - 1, m)] - p_[tri_index(l - 2, m)] / a1);
            }
        }
        if (s == 0.0) return;  // derivatives are only needed off the poles
        for (int l = 0; l <= lmax; ++l) {
            for (int m = 0; m <= l; ++m) {
                const double up = std::sqrt((2.0 * l + 1.0) * (l + 1.0 + m) * (l + 1.0 - m) / (2.0 * l + 3.0));
                const double pl = p_[tri_index(l, m)];
                const double d1 = (-(l + 1.0) * x * pl + up * p_[tri_index(l + 1, m)]) / s;
                dp_[tri_index(l, m)] = d1;
                d2p_[tri_index(l, m)] = -x / s * d1 - (l * (l + 1.0) - double(m) * m / (s * s)) * pl;
            }
        }
    }

    int lmax() const { return lmax_; }
    double theta() const { return theta_; }
    double p(int l, int m) const { return p_[tri_index(l, m)]; }
    double dp(int l, int m) const { return dp_[tri_index(l, m)]; }
    double d2p(int l, int m) const { return d2p_[tri_index(l, m)]; }

private:
    int lmax_ = -1;
    double theta_ = 0.0;
    std::vector<double> p_, dp_, d2p_;
};

/// c_l^j including the (-1)^j phase.
inline double harmonic_norm(int l, int j) {
    const int m = std::abs(j);
    const double lg = std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0);
    return sign_phase(j) * std::sqrt((2.0 * l + 1.0) / (4.0 * pi) * std::exp(lg));
}

/// Unnormalized P_l^j(x), 0 <= j <= l, without Condon-Shortley phase.
inline double assoc_legendre(int l, int j, double x) {
    if (j < 0 || j > l) throw Error("assoc_legendre: need 0 <= j <= l");
    const LegendreColumn col(l, std::acos(std::clamp(x, -1.0, 1.0)));
    return col.p(l, j) / std::abs(harmonic_norm(l, j));
}

inline cplx sph_harm(int l, int j, double theta, double phi) {
    const LegendreColumn col(l, theta);
    return sign_phase(j) * col.p(l, std::abs(j)) * std::exp(I * (double(j) * phi));
}

inline CVec3 grad_sph_harm(int l, int j, double theta, double phi) {
    const double s = std::sin(theta);
    const Vec3 et = e_theta(theta, phi);
    const Vec3 ep = e_phi(theta, phi);
    if (s == 0.0) {
        if (std::abs(j) != 1) return CVec3::Zero();
        const double c = std::cos(theta);
        const double amp = std::sqrt((2.0 * l + 1.0) / (4.0 * pi)) * std::sqrt(l * (l + 1.0));
        return amp * (0.5 * std::pow(c, l) * et.cast<cplx>() +
                      I * double(j) * 0.5 * std::pow(c, l + 1) * ep.cast<cplx>());
    }
    const LegendreColumn col(l, theta);
    const int m = std::abs(j);
    const cplx e = sign_phase(j) * std::exp(I * (double(j) * phi));
    return e * (col.dp(l, m) * et.cast<cplx>() + I * (double(j) * col.p(l, m) / s) * ep.cast<cplx>());
}

/// Components of Grad Y_{l,j}/sqrt(l(l+1)) (k = 1) or x-hat cross it (k = 2)
/// along v1 = e_theta (d = 1) and v2 = e_phi (d = 2), without the e^{ij phi} factor.
inline cplx alpha_from_column(const LegendreColumn& col, int l, int j, int k, int d) {
    const int m = std::abs(j);
    const double s = std::sin(col.theta());
    const double scale = sign_phase(j) / std::sqrt(l * (l + 1.0));
    const cplx grad_t = scale * col.dp(l, m);
    const cplx grad_p = scale * I * (double(j) * col.p(l, m) / s);
    if (k == 1) return d == 1 ? grad_t : grad_p;
    return d == 1 ? -grad_p : grad_t;
}

/// theta-derivative of alpha_from_column.
inline cplx dalpha_from_column(const LegendreColumn& col, int l, int j, int k, int d) {
    const int m = std::abs(j);
    const double s = std::sin(col.theta());
    const double c = std::cos(col.theta());
    const double scale = sign_phase(j) / std::sqrt(l * (l + 1.0));
    const cplx dgrad_t = scale * col.d2p(l, m);
    const cplx dgrad_p = scale * I * (double(j) * (col.dp(l, m) * s - col.p(l, m) * c) / (s * s));
    if (k == 1) return d == 1 ? dgrad_t : dgrad_p;
    return d == 1 ? -dgrad_p : dgrad_t;
}

inline cplx alpha_coeff(int l, int j, int k, int d, double theta) {
    if (std::sin(theta) == 0.0) throw PoleEvaluation("alpha_coeff evaluated at a pole");
    return alpha_from_column(LegendreColumn(l, theta), l, j, k, d);
}

/// d^{(l)}_{jm}(pi/2) for all l <= L. Built column-pair by column-pair with the
/// three-term recurrence in l, which is stable at beta = pi/2.
class WignerTable {
public:
    WignerTable() = default;
    explicit WignerTable(int L) : L_(L) {
        offsets_.resize(L + 1);
        std::size_t total = 0;
        for (int l = 0; l <= L; ++l) {
            offsets_[l] = total;
            total += static_cast<std::size_t>((2 * l + 1) * (2 * l + 1));
        }
        data_.assign(total, 0.0);

        std::vector<double> p_zero(L + 1, 0.0);  // P_l(0)
        p_zero[0] = 1.0;
        for (int l = 1; l + 1 <= L; l += 2) p_zero[l + 1] = -double(l) / (l + 1) * p_zero[l - 1];

        for (int a = -L; a <= L; ++a) {
            for (int b = -L; b <= L; ++b) {
                const int l0 = std::max(std::abs(a), std::abs(b));
                if (l0 == 0) {
                    for (int l = 0; l <= L; ++l) at(l, 0, 0) = p_zero[l];
                    continue;
                }
                double prev = 0.0;
                double cur = initial(l0, a, b);
                at(l0, a, b) = cur;
                for (int l = l0; l < L; ++l) {
                    const double u = std::sqrt((double(l) * l - double(a) * a) * (double(l) * l - double(b) * b));
                    const double w = std::sqrt((double(l + 1) * (l + 1) - double(a) * a) *
                                               (double(l + 1) * (l + 1) - double(b) * b));
                    const double next = (-(2.0 * l + 1.0) * a * b * cur - (l + 1.0) * u * prev) / (l * w);
                    prev = cur;
                    cur = next;
                    at(l + 1, a, b) = cur;
                }
            }
        }
    }

    int lmax() const { return L_; }
    double operator()(int l, int j, int m) const { return data_[offset(l, j, m)]; }

private:
    static double half_binom_sqrt(int l0, int k) {
        // sqrt(C(2 l0, k)) 2^{-l0}
        const double lg = std::lgamma(2.0 * l0 + 1.0) - std::lgamma(k + 1.0) - std::lgamma(2.0 * l0 - k + 1.0);
        return std::exp(0.5 * lg - l0 * std::log(2.0));
    }

    // Closed forms at l = l0 = max(|a|, |b|) on the four edges of the d^{(l0)} matrix.
    static double initial(int l0, int a, int b) {
        if (a == l0) return (((l0 - b) & 1) ? -1.0 : 1.0) * half_binom_sqrt(l0, l0 + b);
        if (b == l0) return half_binom_sqrt(l0, l0 + a);
        if (a == -l0) return half_binom_sqrt(l0, l0 - b);  // d_{-l0,b} = d_{-b,l0}
        return (((l0 + a) & 1) ? -1.0 : 1.0) * half_binom_sqrt(l0, l0 - a);  // d_{a,-l0} = d_{l0,-a}
    }

    std::size_t offset(int l, int j, int m) const {
        return offsets_[l] + static_cast<std::size_t>((j + l) * (2 * l + 1) + (m + l));
    }
    double& at(int l, int j, int m) { return data_[offset(l, j, m)]; }

    int L_ = -1;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

inline WignerTable wigner_table(int L) { return WignerTable(L); }

/// Coefficients F_{l j~ j}(theta_s) with Y_{l,j}(T^{-1} z) = sum_{j~} F e^{i(j-j~)phi} Y_{l,j~}(z).
class RotationCoefficients {
public:
    RotationCoefficients() = default;
    RotationCoefficients(const WignerTable& w, int L, double theta) : L_(L) {
        offsets_.resize(L + 1);
        std::size_t total = 0;
        for (int l = 0; l <= L; ++l) {
            offsets_[l] = total;
            total += static_cast<std::size_t>((2 * l + 1) * (2 * l + 1));
        }
        data_.assign(total, cplx(0.0));
        std::vector<cplx> em(2 * L + 1);
        for (int m = -L; m <= L; ++m) em[m + L] = std::exp(I * (double(m) * theta));
        for (int l = 0; l <= L; ++l) {
            for (int jt = -l; jt <= l; ++jt) {
                for (int j = -l; j <= l; ++j) {
                    cplx acc = 0.0;
                    for (int m = -l; m <= l; ++m) acc += w(l, jt, m) * w(l, j, m) * em[m + L];
                    data_[offset(l, jt, j)] = ipow(j - jt) * acc;
                }
            }
        }
    }

    int lmax() const { return L_; }
    cplx operator()(int l, int jt, int j) const { return data_[offset(l, jt, j)]; }

private:
    static cplx ipow(int k) {
        switch (((k % 4) + 4) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    std::size_t offset(int l, int jt, int j) const {
        return offsets_[l] + static_cast<std::size_t>((jt + l) * (2 * l + 1) + (j + l));
    }

    int L_ = -1;
    std::vector<std::size_t> offsets_;
    std::vector<cplx> data_;
};

inline cplx f_coeff(const WignerTable& w, int l, int jt, int j, double theta_s) {
    cplx acc = 0.0;
    for (int m = -l; m <= l; ++m) acc += w(l, jt, m) * w(l, j, m) * std::exp(I * (double(m) * theta_s));
    const int k = ((j - jt) % 4 + 4) % 4;
    const cplx ip[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return ip[k] * acc;
}

}  // namespace elscat
