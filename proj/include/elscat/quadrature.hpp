#pragma once

// Gauss-Legendre x trapezoidal product rule on the unit sphere and the weights
// of the weakly singular rule centered at the north pole.

#include <cmath>
#include <vector>

#include "elscat/sphharm.hpp"
#include "elscat/types.hpp"

namespace elscat {

/// Value of the Legendre polynomial P_n and P_{n-1} at x.
inline std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

/// Zeros of P_count in increasing order.
inline std::vector<double> legendre_zeros(int count) {
    std::vector<double> z(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        // Chebyshev-like initial guess for the (count-k)-th zero from the top.
        double x = std::cos(pi * (count - k - 0.25) / (count + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, pm1] = legendre_pair(count, x);
            const double dp = count * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        z[static_cast<std::size_t>(k)] = x;
    }
    return z;
}

struct SphericalQuadrature {
    int n = 0;                   // rule order: n+1 theta nodes, 2n+2 phi nodes
    std::vector<double> z;       // Legendre zeros, ascending
    std::vector<double> theta;   // arccos z
    std::vector<double> weight;  // nu_s
    std::vector<double> phi;     // r pi/(n+1)
    double mu = 0.0;             // pi/(n+1)

    int n_theta() const { return n + 1; }
    int n_phi() const { return 2 * n + 2; }
    int size() const { return n_theta() * n_phi(); }
};

inline SphericalQuadrature build_rule(int n) {
    if (n < 0) throw Error("build_rule: order must be non-negative");
    SphericalQuadrature q;
    q.n = n;
    q.z = legendre_zeros(n + 1);
    q.theta.resize(q.z.size());
    q.weight.resize(q.z.size());
    for (std::size_t s = 0; s < q.z.size(); ++s) {
        const double x = q.z[s];
        q.theta[s] = std::acos(x);
        const double pn = legendre_pair(n, x).first;
        q.weight[s] = 2.0 * (1.0 - x * x) / ((n + 1.0) * pn * (n + 1.0) * pn);
    }
    q.mu = pi / (n + 1);
    q.phi.resize(static_cast<std::size_t>(2 * n + 2));
    for (int r = 0; r < 2 * n + 2; ++r) q.phi[static_cast<std::size_t>(r)] = r * pi / (n + 1);
    return q;
}

/// Q_n(f) for samples ordered s * n_phi + r.
template <class T>
T integrate(const SphericalQuadrature& q, const std::vector<T>& samples) {
    if (static_cast<int>(samples.size()) != q.size()) throw ShapeMismatch("sample count does not match rule");
    T acc{};
    for (int s = 0; s < q.n_theta(); ++s) {
        T ring{};
        for (int r = 0; r < q.n_phi(); ++r) ring += samples[static_cast<std::size_t>(s * q.n_phi() + r)];
        acc += (q.weight[s] * q.mu) * ring;
    }
    return acc;
}

/// Discrete coefficients (psi, Y_{l,j})_rule for l <= n in lj_index layout.
inline std::vector<cplx> discrete_project_scalar(const SphericalQuadrature& q, const std::vector<cplx>& samples,
                                                 int n) {
    if (static_cast<int>(samples.size()) != q.size()) throw ShapeMismatch("sample count does not match rule");
    std::vector<cplx> coeff(static_cast<std::size_t>((n + 1) * (n + 1)), cplx(0.0));
    std::vector<cplx> ring(static_cast<std::size_t>(2 * n + 1));
    for (int s = 0; s < q.n_theta(); ++s) {
        // ring[j] = sum_r mu psi e^{-i j phi_r}
        for (int j = -n; j <= n; ++j) {
            cplx acc = 0.0;
            for (int r = 0; r < q.n_phi(); ++r)
                acc += samples[static_cast<std::size_t>(s * q.n_phi() + r)] * std::exp(-I * (double(j) * q.phi[r]));
            ring[static_cast<std::size_t>(j + n)] = q.mu * acc;
        }
        const LegendreColumn col(n, q.theta[s]);
        for (int l = 0; l <= n; ++l)
            for (int j = -l; j <= l; ++j)
                coeff[static_cast<std::size_t>(lj_index(l, j))] +=
                    q.weight[s] * sign_phase(j) * col.p(l, std::abs(j)) * ring[static_cast<std::size_t>(j + n)];
    }
    return coeff;
}

/// alpha_{s'} = sum_{l=0}^{n'} P_l(cos Theta_{s'}) for the rule of order n'.
inline std::vector<double> singular_weights(int nprime) {
    const SphericalQuadrature q = build_rule(nprime);
    std::vector<double> a(q.z.size());
    for (std::size_t s = 0; s < q.z.size(); ++s) {
        double p0 = 1.0, p1 = q.z[s], sum = 1.0;
        if (nprime >= 1) sum += p1;
        for (int k = 2; k <= nprime; ++k) {
            const double p2 = ((2.0 * k - 1.0) * q.z[s] * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
            sum += p1;
        }
        a[s] = sum;
    }
    return a;
}

}  // namespace elscat
