#pragma once

// Galerkin system for the coupled boundary integral equations.
//
// Layout of the unknowns: scalar coefficients w_{lj} (l = 0..n, j = -l..l),
// then W_{lj1} and W_{lj2} (l = 1..n). The matrix is
//
//   [ -I + K   N1        N2      ]
//   [ H1       U11+M11   U12+M12 ]
//   [ H2       U21+M21   U22+M22 ]
//
// Every block except I and U goes through the same staged sum over one outer
// theta ring s at a time:
//   E: DFT over the inner phi nodes of the kernel samples at the rotated nodes
//   D: sum over the inner theta nodes against Y or alpha at the pole-centered grid
//   C: sum over j~ with the rotation coefficients F_{s l j~ j}
//   B: DFT over the outer phi nodes (with outer test-function factors for H)
// followed by the theta_s test factors. Each stage is O(n) per entry.

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elscat/geometry.hpp"
#include "elscat/incident.hpp"
#include "elscat/kernels.hpp"
#include "elscat/parallel.hpp"
#include "elscat/quadrature.hpp"
#include "elscat/rotation.hpp"
#include "elscat/sphharm.hpp"

namespace elscat {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RowCMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int scalar_dim(int n) { return (n + 1) * (n + 1); }
inline int tangential_dim(int n) { return (n + 1) * (n + 1) - 1; }
inline int system_dim(int n) { return scalar_dim(n) + 2 * tangential_dim(n); }

/// Which blocks a call to assemble_blocks fills.
struct BlockMask {
    bool identity = true, k = true, n = true, h = true, u = true, m = true;
    bool single_layer = false;  // (J S^p Y, Y'), not part of the system
    static BlockMask none() { return {false, false, false, false, false, false}; }
    static BlockMask only_k() { return {false, true, false, false, false, false}; }
    static BlockMask only_n() { return {false, false, true, false, false, false}; }
    static BlockMask only_h() { return {false, false, false, true, false, false}; }
    static BlockMask only_m() { return {false, false, false, false, false, true}; }
    static BlockMask only_gram() { return {true, false, false, false, true, false}; }
    bool any_chain() const { return k || n || h || m || single_layer; }
};

struct Blocks {
    CMatrix I, K, S;
    std::array<CMatrix, 2> N, H;
    std::array<std::array<CMatrix, 2>, 2> U, M;
};

/// Outer-node data: frame, transport and the H test-function factors.
struct OuterNode {
    SurfaceFrame frame;
    Mat3 F;
    std::array<Vec3, 2> o;      // F v^{(d)}
    std::array<double, 2> g1;   // (F v).t1 / sin(theta)
    std::array<double, 2> g24;  // d_phi(F v).t1 / sin(theta) - d_theta(F v).t2
    std::array<double, 2> g3;   // -(F v).t2
};

class AssemblyContext {
public:
    AssemblyContext(Surface surface, ElasticMedium medium, int n, int nprime = -1, int threads = 1)
        : surface_(std::move(surface)), medium_(medium), n_(n), np_(nprime < 0 ? 2 * n + 1 : nprime),
          threads_(std::max(threads, 1)) {
        if (n_ < 1) throw ConfigError("ansatz degree n must be at least 1");
        if (np_ < n_ + 1) throw ConfigError("inner degree n' must be at least n+1");
        std::tie(kp_, ks_) = wavenumbers(medium_);
        outer_ = build_rule(n_ + 1);
        inner_ = build_rule(np_);
        alpha_sing_ = singular_weights(np_);
        wigner_ = WignerTable(n_);
        build_inner_tables();
        build_outer_tables();
    }

    const Surface& surface() const { return surface_; }
    const ElasticMedium& medium() const { return medium_; }
    int n() const { return n_; }
    int nprime() const { return np_; }
    int threads() const { return threads_; }
    double kappa_p() const { return kp_; }
    double kappa_s() const { return ks_; }
    const SphericalQuadrature& outer() const { return outer_; }
    const SphericalQuadrature& inner() const { return inner_; }
    const std::vector<double>& singular_alpha() const { return alpha_sing_; }
    const WignerTable& wigner() const { return wigner_; }
    const OuterNode& node(int s, int r) const { return nodes_[static_cast<std::size_t>(s * outer_.n_phi() + r)]; }
    const LegendreColumn& outer_column(int s) const { return outer_cols_[static_cast<std::size_t>(s)]; }
    const LegendreColumn& inner_column(int s) const { return inner_cols_[static_cast<std::size_t>(s)]; }

    // Tables for the staged sums (public for the assembly routines).
    CMatrix inner_dft;                               // (r', j~+n): xi e^{i j~ Phi_r'}
    std::vector<CMatrix> inner_y;                    // [j~+n](l, s'): eta c P_l^{|j~|}(Theta_s')
    std::array<std::array<std::vector<CMatrix>, 2>, 2> inner_alpha;  // [k][d][j~+n](l, s'): eta alpha
    std::vector<std::vector<CMatrix>> rot;           // [s][l](j~+l, j+l): F_{s l j~ j}
    std::vector<Vec3> inner_z;                       // p(Theta, Phi) at s' * nphi + r'
    std::array<std::vector<Vec3>, 2> inner_v;        // e_theta, e_phi at the same nodes

private:
    void build_inner_tables() {
        const int ns = inner_.n_theta(), nr = inner_.n_phi(), n = n_;
        inner_dft.resize(nr, 2 * n + 1);
        for (int r = 0; r < nr; ++r)
            for (int j = -n; j <= n; ++j) inner_dft(r, j + n) = inner_.mu * std::exp(I * (double(j) * inner_.phi[r]));
        inner_cols_.reserve(static_cast<std::size_t>(ns));
        for (int s = 0; s < ns; ++s) inner_cols_.emplace_back(n, inner_.theta[s]);
        inner_y.assign(static_cast<std::size_t>(2 * n + 1), CMatrix::Zero(n + 1, ns));
        for (auto& kk : inner_alpha)
            for (auto& dd : kk) dd.assign(static_cast<std::size_t>(2 * n + 1), CMatrix::Zero(n + 1, ns));
        for (int s = 0; s < ns; ++s) {
            const LegendreColumn& col = inner_cols_[static_cast<std::size_t>(s)];
            const double eta = inner_.weight[s];
            for (int l = 0; l <= n; ++l) {
                for (int j = -l; j <= l; ++j) {
                    const auto jt = static_cast<std::size_t>(j + n);
                    inner_y[jt](l, s) = eta * sign_phase(j) * col.p(l, std::abs(j));
                    if (l == 0) continue;
                    for (int k = 0; k < 2; ++k)
                        for (int d = 0; d < 2; ++d)
                            inner_alpha[k][d][jt](l, s) = eta * alpha_from_column(col, l, j, k + 1, d + 1);
                }
            }
        }
        inner_z.resize(static_cast<std::size_t>(ns * nr));
        inner_v[0].resize(inner_z.size());
        inner_v[1].resize(inner_z.size());
        for (int s = 0; s < ns; ++s) {
            for (int r = 0; r < nr; ++r) {
                const auto i = static_cast<std::size_t>(s * nr + r);
                inner_z[i] = sphere_point(inner_.theta[s], inner_.phi[r]);
                inner_v[0][i] = e_theta(inner_.theta[s], inner_.phi[r]);
                inner_v[1][i] = e_phi(inner_.theta[s], inner_.phi[r]);
            }
        }
    }

    void build_outer_tables() {
        const int ns = outer_.n_theta(), nr = outer_.n_phi();
        outer_cols_.reserve(static_cast<std::size_t>(ns));
        rot.resize(static_cast<std::size_t>(ns));
        for (int s = 0; s < ns; ++s) {
            outer_cols_.emplace_back(n_, outer_.theta[s]);
            const RotationCoefficients F(wigner_, n_, outer_.theta[s]);
            auto& per_l = rot[static_cast<std::size_t>(s)];
            per_l.resize(static_cast<std::size_t>(n_ + 1));
            for (int l = 0; l <= n_; ++l) {
                CMatrix m(2 * l + 1, 2 * l + 1);
                for (int jt = -l; jt <= l; ++jt)
                    for (int j = -l; j <= l; ++j) m(jt + l, j + l) = F(l, jt, j);
                per_l[static_cast<std::size_t>(l)] = std::move(m);
            }
        }
        nodes_.resize(static_cast<std::size_t>(ns * nr));
        for (int s = 0; s < ns; ++s) {
            const double th = outer_.theta[s], st = std::sin(th);
            for (int r = 0; r < nr; ++r) {
                const double ph = outer_.phi[r];
                OuterNode& X = nodes_[static_cast<std::size_t>(s * nr + r)];
                const TransportJet tj = tangent_transport_jet(surface_, th, ph);
                X.frame = surface_.frame(th, ph);
                X.F = tj.F;
                const Vec3 xh = sphere_point(th, ph);
                const std::array<Vec3, 2> v{e_theta(th, ph), e_phi(th, ph)};
                const std::array<Vec3, 2> v_t{-xh, Vec3::Zero()};
                const std::array<Vec3, 2> v_p{std::cos(th) * e_phi(th, ph), Vec3(-std::cos(ph), -std::sin(ph), 0.0)};
                for (int d = 0; d < 2; ++d) {
                    X.o[d] = tj.F * v[d];
                    const Vec3 dth = tj.dF_dtheta * v[d] + tj.F * v_t[d];
                    const Vec3 dph = tj.dF_dphi * v[d] + tj.F * v_p[d];
                    X.g1[d] = X.o[d].dot(X.frame.t1) / st;
                    X.g24[d] = dph.dot(X.frame.t1) / st - dth.dot(X.frame.t2);
                    X.g3[d] = -X.o[d].dot(X.frame.t2);
                }
            }
        }
    }

    Surface surface_;
    ElasticMedium medium_;
    int n_, np_, threads_;
    double kp_ = 0.0, ks_ = 0.0;
    SphericalQuadrature outer_, inner_;
    std::vector<double> alpha_sing_;
    WignerTable wigner_;
    std::vector<LegendreColumn> outer_cols_, inner_cols_;
    std::vector<OuterNode> nodes_;
};

namespace detail {

// Family indices of the per-inner-node kernel samples.
inline constexpr int fam_k = 0;                                    // alpha K1 + K2
inline constexpr int fam_p = 1;                                    // alpha S1p + S2p
inline constexpr int fam_n(int h, int d) { return 2 + 2 * h + d; }  // (alpha S1s + S2s) u_d . (t2, t1)[h]
inline constexpr int fam_m(int dp, int d) { return 6 + 2 * dp + d; }  // o_{d'}^T M u_d
inline constexpr int fam_count = 10;

// C-stage family indices.
inline constexpr int cf_k = 0, cf_p = 1;
inline constexpr int cf_n(int kt, int h) { return 2 + 2 * kt + h; }
inline constexpr int cf_m(int kt, int dp) { return 6 + 2 * kt + dp; }

// Stages E, D, C for one outer node; returns C as ((n+1)^2 x 10), rows lj_index(l, j).
inline CMatrix outer_node_chain(const AssemblyContext& ctx, int s, int r) {
    const int n = ctx.n();
    const SphericalQuadrature& in = ctx.inner();
    const int ns = in.n_theta(), nr = in.n_phi();
    const double th = ctx.outer().theta[s], ph = ctx.outer().phi[r];
    const Mat3 Tt = rotation_to_pole(th, ph).transpose();
    const OuterNode& X = ctx.node(s, r);
    const Vec3& x = X.frame.point;
    const Vec3& nx = X.frame.normal;
    const double jx = X.frame.jacobian;
    const double kp = ctx.kappa_p(), ks = ctx.kappa_s();
    const double inv2pi = 1.0 / (2.0 * pi);
    const Surface& surf = ctx.surface();

    CMatrix fam(fam_count * ns, nr);
    for (int sp = 0; sp < ns; ++sp) {
        const double a = ctx.singular_alpha()[static_cast<std::size_t>(sp)];
        const double dhat = std::sqrt(2.0 * (1.0 - in.z[sp]));
        for (int rp = 0; rp < nr; ++rp) {
            const auto idx = static_cast<std::size_t>(sp * nr + rp);
            const Vec3 yh = Tt * ctx.inner_z[idx];
            const auto [ty, py] = spherical_angles(yh);
            const SurfaceFrame fy = surf.frame(ty, py);
            const Mat3 Fy = transport_matrix(yh, fy.normal);
            const Vec3 dv = x - fy.point;
            const double rr = dv.norm();
            if (rr == 0.0) throw CoincidentPoints("rotated inner node coincides with the outer node");
            const double rho = dhat >= taylor_radius ? nx.dot(dv) / (rr * rr)
                                                     : taylor_normal_ratio(surf, th, ph, ty, py, nx);
            const double R = dhat / rr;
            const double jy = fy.jacobian;

            const double cp = std::cos(kp * rr), sp_r = std::sin(kp * rr) / rr;
            const double cs = std::cos(ks * rr), ss_r = std::sin(ks * rr) / rr;
            const cplx s1p = cp * inv2pi, s2p = I * (sp_r * inv2pi);
            const cplx s1s = cs * inv2pi, s2s = I * (ss_r * inv2pi);
            const cplx wp = (a * R * s1p + s2p) * jy;
            const cplx ws = (a * R * s1s + s2s) * jy;
            const cplx k1 = -rho * s1p + I * kp * (rho * rr * rr) * s2p;
            const cplx k2 = -rho * (s2p - I * kp * s1p);
            const cplx wk = (a * R * k1 + k2) * (jx * jy);
            const double a1 = -(cs + ks * rr * std::sin(ks * rr)) * inv2pi;
            const cplx a2 = I * ((ks * cs - ss_r) * inv2pi);
            const cplx cm = (a * R * a1 + a2) * (jx * jy);
            const Vec3 dn = nx - fy.normal;
            const double inv_r2 = 1.0 / (rr * rr);

            fam(fam_k * ns + sp, rp) = wk;
            fam(fam_p * ns + sp, rp) = wp;
            for (int d = 0; d < 2; ++d) {
                const Vec3 u = Fy * (Tt * ctx.inner_v[d][idx]);
                fam(fam_n(0, d) * ns + sp, rp) = ws * u.dot(X.frame.t2);
                fam(fam_n(1, d) * ns + sp, rp) = ws * u.dot(X.frame.t1);
                const double dnu = dn.dot(u) * inv_r2;
                for (int dp = 0; dp < 2; ++dp) {
                    const Vec3& o = X.o[dp];
                    fam(fam_m(dp, d) * ns + sp, rp) = cm * (o.dot(dv) * dnu - rho * o.dot(u));
                }
            }
        }
    }

    // E stage.
    const CMatrix E = fam * ctx.inner_dft;  // (fam * ns) x (2n+1)

    // D stage: Dk, Dp are (n+1) x (2n+1); Dn[kt][h], Dm[kt][dp] likewise.
    std::array<CMatrix, fam_count> D;
    for (auto& m : D) m = CMatrix::Zero(n + 1, 2 * n + 1);
    CMatrix cat(ns, 4);
    for (int jt = -n; jt <= n; ++jt) {
        const auto c = static_cast<std::size_t>(jt + n);
        const auto col = [&](int f) { return E.block(f * ns, jt + n, ns, 1); };
        D[cf_k].col(jt + n) = ctx.inner_y[c] * col(fam_k);
        D[cf_p].col(jt + n) = ctx.inner_y[c] * col(fam_p);
        for (int kt = 0; kt < 2; ++kt) {
            CMatrix acc = CMatrix::Zero(n + 1, 4);
            for (int d = 0; d < 2; ++d) {
                cat.col(0) = col(fam_n(0, d));
                cat.col(1) = col(fam_n(1, d));
                cat.col(2) = col(fam_m(0, d));
                cat.col(3) = col(fam_m(1, d));
                acc.noalias() += ctx.inner_alpha[kt][d][c] * cat;
            }
            D[cf_n(kt, 0)].col(jt + n) = acc.col(0);
            D[cf_n(kt, 1)].col(jt + n) = acc.col(1);
            D[cf_m(kt, 0)].col(jt + n) = acc.col(2);
            D[cf_m(kt, 1)].col(jt + n) = acc.col(3);
        }
    }

    // C stage.
    CMatrix C = CMatrix::Zero(scalar_dim(n), fam_count);
    const auto& rot = ctx.rot[static_cast<std::size_t>(s)];
    for (int l = 0; l <= n; ++l) {
        CMatrix Dl(2 * l + 1, fam_count);
        for (int jt = -l; jt <= l; ++jt) {
            const cplx e = std::exp(-I * (double(jt) * ph));
            for (int f = 0; f < fam_count; ++f) Dl(jt + l, f) = e * D[static_cast<std::size_t>(f)](l, jt + n);
        }
        const CMatrix Cl = rot[static_cast<std::size_t>(l)].transpose() * Dl;
        for (int j = -l; j <= l; ++j)
            C.row(lj_index(l, j)) = std::exp(I * (double(j) * ph)) * Cl.row(j + l);
    }
    return C;
}

}  // namespace detail

/// Fills the blocks selected by `mask` with the staged sums.
inline Blocks assemble_blocks(const AssemblyContext& ctx, BlockMask mask = {}) {
    using namespace detail;
    const int n = ctx.n();
    const int ny = scalar_dim(n), nz = tangential_dim(n);
    const SphericalQuadrature& out = ctx.outer();
    const int ns = out.n_theta(), nr = out.n_phi();

    RowCMatrix K, Sb, Nb[2], Hb[2], Mb[2][2];
    if (mask.k) K = RowCMatrix::Zero(ny, ny);
    if (mask.single_layer) Sb = RowCMatrix::Zero(ny, ny);
    for (int k = 0; k < 2; ++k) {
        if (mask.n) Nb[k] = RowCMatrix::Zero(ny, nz);
        if (mask.h) Hb[k] = RowCMatrix::Zero(nz, ny);
        for (int kt = 0; kt < 2; ++kt)
            if (mask.m) Mb[k][kt] = RowCMatrix::Zero(nz, nz);
    }

    // e^{-i j' phi_r} mu
    CMatrix eneg(2 * n + 1, nr);
    for (int jp = -n; jp <= n; ++jp)
        for (int r = 0; r < nr; ++r) eneg(jp + n, r) = out.mu * std::exp(-I * (double(jp) * out.phi[r]));

    if (mask.any_chain()) {
        std::vector<CMatrix> Cr(static_cast<std::size_t>(nr));
        for (int s = 0; s < ns; ++s) {
            parallel_for(0, nr, ctx.threads(),
                         [&](std::ptrdiff_t r) { Cr[static_cast<std::size_t>(r)] = outer_node_chain(ctx, s, int(r)); });

            // B stage: 15 DFTs over r, each (2n+1) x (n+1)^2.
            const auto gather = [&](int f, auto weight) {
                CMatrix M(nr, ny);
                for (int r = 0; r < nr; ++r) M.row(r) = weight(r) * Cr[static_cast<std::size_t>(r)].col(f).transpose();
                return CMatrix(eneg * M);
            };
            const auto one = [](int) { return 1.0; };
            CMatrix Bk, Bs, Bn[2][2], Bm[2][2], Bh1[2], Bh24[2], Bh3[2];
            if (mask.k) Bk = gather(cf_k, one);
            if (mask.single_layer) Bs = gather(cf_p, [&](int r) { return ctx.node(s, r).frame.jacobian; });
            for (int kt = 0; kt < 2; ++kt)
                for (int h = 0; h < 2; ++h) {
                    if (mask.n) Bn[kt][h] = gather(cf_n(kt, h), one);
                    if (mask.m) Bm[kt][h] = gather(cf_m(kt, h), one);
                }
            if (mask.h)
                for (int d = 0; d < 2; ++d) {
                    Bh1[d] = gather(cf_p, [&](int r) { return ctx.node(s, r).g1[d]; });
                    Bh24[d] = gather(cf_p, [&](int r) { return ctx.node(s, r).g24[d]; });
                    Bh3[d] = gather(cf_p, [&](int r) { return ctx.node(s, r).g3[d]; });
                }

            // Test factors at theta_s; rows with a fixed j' are owned by one task.
            const LegendreColumn& col = ctx.outer_column(s);
            const double nu_s = out.weight[s];
            const double st = std::sin(out.theta[s]);
            parallel_for(-n, n + 1, ctx.threads(), [&](std::ptrdiff_t jpi) {
                const int jp = int(jpi);
                const int br = jp + n;
                for (int lp = std::abs(jp); lp <= n; ++lp) {
                    const int ry = lj_index(lp, jp);
                    const double cP = sign_phase(jp) * col.p(lp, std::abs(jp));
                    const double cdP = sign_phase(jp) * col.dp(lp, std::abs(jp));
                    if (mask.k) K.row(ry) += (nu_s * cP) * Bk.row(br);
                    if (mask.single_layer) Sb.row(ry) += (nu_s * cP) * Bs.row(br);
                    if (mask.n) {
                        const cplx w1 = -nu_s * cdP;
                        const cplx w2 = -nu_s * I * (double(jp) * cP / st);
                        for (int kt = 0; kt < 2; ++kt)
                            Nb[kt].row(ry) += w1 * Bn[kt][0].row(br).tail(nz) + w2 * Bn[kt][1].row(br).tail(nz);
                    }
                    if (lp == 0) continue;
                    const int rz = ry - 1;
                    for (int kp = 0; kp < 2; ++kp) {
                        std::array<cplx, 2> a, da;
                        for (int d = 0; d < 2; ++d) {
                            a[d] = std::conj(alpha_from_column(col, lp, jp, kp + 1, d + 1));
                            da[d] = std::conj(dalpha_from_column(col, lp, jp, kp + 1, d + 1));
                        }
                        if (mask.h)
                            for (int d = 0; d < 2; ++d)
                                Hb[kp].row(rz) += (nu_s * std::conj(I * double(jp)) * a[d]) * Bh1[d].row(br) +
                                                  (nu_s * a[d]) * Bh24[d].row(br) + (nu_s * da[d]) * Bh3[d].row(br);
                        if (mask.m)
                            for (int kt = 0; kt < 2; ++kt)
                                for (int dp = 0; dp < 2; ++dp)
                                    Mb[kp][kt].row(rz) += (nu_s * a[dp]) * Bm[kt][dp].row(br).tail(nz);
                    }
                }
            });
        }
    }

    Blocks b;
    if (mask.k) b.K = K;
    if (mask.single_layer) b.S = Sb;
    for (int k = 0; k < 2; ++k) {
        if (mask.n) b.N[k] = Nb[k];
        if (mask.h) b.H[k] = Hb[k];
        for (int kt = 0; kt < 2; ++kt)
            if (mask.m) b.M[k][kt] = Mb[k][kt];
    }

    if (mask.identity || mask.u) {
        // Gram blocks: sum_r mu J e^{i(j - j')phi_r} depends only on j' - j.
        if (mask.identity) b.I = CMatrix::Zero(ny, ny);
        if (mask.u)
            for (auto& row : b.U)
                for (auto& m : row) m = CMatrix::Zero(nz, nz);
        for (int s = 0; s < ns; ++s) {
            std::vector<cplx> jhat(static_cast<std::size_t>(4 * n + 1));
            for (int m = -2 * n; m <= 2 * n; ++m) {
                cplx acc = 0.0;
                for (int r = 0; r < nr; ++r)
                    acc += ctx.node(s, r).frame.jacobian * std::exp(-I * (double(m) * out.phi[r]));
                jhat[static_cast<std::size_t>(m + 2 * n)] = out.mu * acc;
            }
            const LegendreColumn& col = ctx.outer_column(s);
            const double nu_s = out.weight[s];
            std::vector<double> cp(static_cast<std::size_t>(ny));
            std::vector<std::array<cplx, 4>> al(static_cast<std::size_t>(ny));  // [2(k-1) + d-1]
            for (int l = 0; l <= n; ++l)
                for (int j = -l; j <= l; ++j) {
                    const auto c = static_cast<std::size_t>(lj_index(l, j));
                    cp[c] = sign_phase(j) * col.p(l, std::abs(j));
                    if (l > 0)
                        for (int k = 0; k < 2; ++k)
                            for (int d = 0; d < 2; ++d) al[c][2 * k + d] = alpha_from_column(col, l, j, k + 1, d + 1);
                }
            for (int lp = 0; lp <= n; ++lp)
                for (int jp = -lp; jp <= lp; ++jp) {
                    const int rp = lj_index(lp, jp);
                    for (int l = 0; l <= n; ++l)
                        for (int j = -l; j <= l; ++j) {
                            const int c = lj_index(l, j);
                            const cplx jh = nu_s * jhat[static_cast<std::size_t>(jp - j + 2 * n)];
                            if (mask.identity) b.I(rp, c) += jh * (cp[std::size_t(rp)] * cp[std::size_t(c)]);
                            if (!mask.u || l == 0 || lp == 0) continue;
                            const auto& a = al[std::size_t(c)];
                            const auto& ap = al[std::size_t(rp)];
                            for (int kp = 0; kp < 2; ++kp)
                                for (int kt = 0; kt < 2; ++kt)
                                    b.U[kp][kt](rp - 1, c - 1) += jh * (a[2 * kt] * std::conj(ap[2 * kp]) +
                                                                        a[2 * kt + 1] * std::conj(ap[2 * kp + 1]));
                        }
                }
        }
    }
    return b;
}

inline CMatrix assemble_single_layer_block(const AssemblyContext& c) {
    BlockMask m = BlockMask::none();
    m.single_layer = true;
    return assemble_blocks(c, m).S;
}
inline CMatrix assemble_k_block(const AssemblyContext& c) { return assemble_blocks(c, BlockMask::only_k()).K; }
inline CMatrix assemble_n_block(const AssemblyContext& c, int kt) {
    return assemble_blocks(c, BlockMask::only_n()).N[static_cast<std::size_t>(kt - 1)];
}
inline CMatrix assemble_h_block(const AssemblyContext& c, int kp) {
    return assemble_blocks(c, BlockMask::only_h()).H[static_cast<std::size_t>(kp - 1)];
}
inline CMatrix assemble_m_block(const AssemblyContext& c, int kp, int kt) {
    return assemble_blocks(c, BlockMask::only_m()).M[static_cast<std::size_t>(kp - 1)][static_cast<std::size_t>(kt - 1)];
}
/// (I, U) Gram blocks.
inline std::pair<CMatrix, std::array<std::array<CMatrix, 2>, 2>> assemble_identity_blocks(const AssemblyContext& c) {
    Blocks b = assemble_blocks(c, BlockMask::only_gram());
    return {std::move(b.I), std::move(b.U)};
}

/// Stacked moments 2(f1 J, Y)_{n+1}, 2(f2 J, Z1)_{n+1}, 2(f2 J, Z2)_{n+1}.
inline CVector assemble_rhs(const AssemblyContext& ctx, const IncidentField& incident) {
    const int n = ctx.n();
    const int ny = scalar_dim(n), nz = tangential_dim(n);
    const SphericalQuadrature& out = ctx.outer();
    const int ns = out.n_theta(), nr = out.n_phi();
    CVector b = CVector::Zero(ny + 2 * nz);
    for (int s = 0; s < ns; ++s) {
        // ring sums over r of mu J f1 e^{-ij'phi} and mu J (f2 . o_d) e^{-ij'phi}
        std::vector<cplx> g1(static_cast<std::size_t>(2 * n + 1), 0.0);
        std::array<std::vector<cplx>, 2> g2{std::vector<cplx>(2 * n + 1, 0.0), std::vector<cplx>(2 * n + 1, 0.0)};
        for (int r = 0; r < nr; ++r) {
            const OuterNode& X = ctx.node(s, r);
            const BoundaryData f = incident_trace_at(incident, X.frame);
            const double w = out.mu * X.frame.jacobian;
            const std::array<cplx, 2> fo{dot(X.o[0], f.f2), dot(X.o[1], f.f2)};
            for (int jp = -n; jp <= n; ++jp) {
                const cplx e = w * std::exp(-I * (double(jp) * out.phi[r]));
                g1[static_cast<std::size_t>(jp + n)] += e * f.f1;
                g2[0][static_cast<std::size_t>(jp + n)] += e * fo[0];
                g2[1][static_cast<std::size_t>(jp + n)] += e * fo[1];
            }
        }
        const LegendreColumn& col = ctx.outer_column(s);
        const double nu2 = 2.0 * out.weight[s];
        for (int lp = 0; lp <= n; ++lp) {
            for (int jp = -lp; jp <= lp; ++jp) {
                const auto c = static_cast<std::size_t>(jp + n);
                b(lj_index(lp, jp)) += nu2 * sign_phase(jp) * col.p(lp, std::abs(jp)) * g1[c];
                if (lp == 0) continue;
                for (int kp = 0; kp < 2; ++kp) {
                    cplx acc = 0.0;
                    for (int d = 0; d < 2; ++d)
                        acc += std::conj(alpha_from_column(col, lp, jp, kp + 1, d + 1)) * g2[d][c];
                    b(ny + kp * nz + lj_index(lp, jp) - 1) += nu2 * acc;
                }
            }
        }
    }
    return b;
}

/// Dense Galerkin system A x = b.
struct BlockSystem {
    int n = 0;
    int nprime = 0;
    CMatrix A;
    CVector b;

    int dim() const { return int(A.rows()); }
};

inline CMatrix compose_matrix(int n, const Blocks& b) {
    const int ny = scalar_dim(n), nz = tangential_dim(n);
    CMatrix A(ny + 2 * nz, ny + 2 * nz);
    A.block(0, 0, ny, ny) = -b.I + b.K;
    for (int k = 0; k < 2; ++k) {
        A.block(0, ny + k * nz, ny, nz) = b.N[k];
        A.block(ny + k * nz, 0, nz, ny) = b.H[k];
        for (int kt = 0; kt < 2; ++kt) A.block(ny + k * nz, ny + kt * nz, nz, nz) = b.U[k][kt] + b.M[k][kt];
    }
    return A;
}

inline BlockSystem assemble_system(const AssemblyContext& ctx, const IncidentField& incident) {
    BlockSystem sys;
    sys.n = ctx.n();
    sys.nprime = ctx.nprime();
    sys.A = compose_matrix(ctx.n(), assemble_blocks(ctx));
    sys.b = assemble_rhs(ctx, incident);
    return sys;
}

/// Binary dump: uint64 rows, uint64 cols, A column-major as (re, im) float64 pairs,
/// then uint64 length and b the same way. Little-endian hosts only.
inline void dump_system(const BlockSystem& sys, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    const auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    const auto put_c = [&](cplx z) {
        const double re = z.real(), im = z.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof re);
        out.write(reinterpret_cast<const char*>(&im), sizeof im);
    };
    put_u64(static_cast<std::uint64_t>(sys.A.rows()));
    put_u64(static_cast<std::uint64_t>(sys.A.cols()));
    for (Eigen::Index c = 0; c < sys.A.cols(); ++c)
        for (Eigen::Index r = 0; r < sys.A.rows(); ++r) put_c(sys.A(r, c));
    put_u64(static_cast<std::uint64_t>(sys.b.size()));
    for (Eigen::Index i = 0; i < sys.b.size(); ++i) put_c(sys.b(i));
}

}  // namespace elscat
