#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "nhchain/errors.hpp"
#include "nhchain/geometry.hpp"
#include "nhchain/green.hpp"
#include "nhchain/parallel.hpp"

namespace nhchain {

struct CapacitanceOptions {
    int nmult = 10;        // Fourier harmonics |n| <= nmult per circle
    int quad_points = 0;   // boundary quadrature nodes; 0 = max(64, 6*nmult)
    double gamma_eps_frac = 1e-3; // alpha = eps, 2*eps extrapolation step, units of pi/L
    GreenEvalParams green;
    int threads = 0;       // alpha-sweep parallelism; 0 = hardware

    int resolve_quad(int nmult_v) const {
        return quad_points > 0 ? quad_points : std::max(64, 6 * nmult_v);
    }
};

// 2x2 quasiperiodic capacitance matrix at one alpha. Hermitian with equal real
// diagonal and positive definite when the assembly converged.
struct QuasiCapacitance {
    double alpha = 0.0;
    Eigen::Matrix2cd C = Eigen::Matrix2cd::Zero();
    int nmult = 0;
    double residual = 0.0; // structure defect: hermiticity + diagonal equality

    double c11() const { return C(0, 0).real(); }
    complexd c12() const { return C(0, 1); }

    double structure_defect() const {
        double n = C.norm();
        double herm = (C - C.adjoint()).norm();
        double diag = std::abs(C(0, 0) - C(1, 1)) + std::abs(C(0, 0).imag());
        return (herm + diag) / n;
    }
    bool positive_definite() const {
        return c11() > std::abs(c12()) && std::abs(c12()) > 0.0;
    }
};

struct RealSpaceCapacitance {
    int m = 0;
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
};

namespace detail {

// Fourier synthesis/projection matrices for one circle: columns e^{i n theta}.
inline void fourier_mats(int nmult, int nq, Eigen::MatrixXcd& proj, Eigen::MatrixXcd& synth) {
    const int nb = 2 * nmult + 1;
    proj.resize(nb, nq);
    synth.resize(nq, nb);
    for (int t = 0; t < nq; ++t) {
        const double th = 2.0 * M_PI * t / nq;
        for (int k = 0; k < nb; ++k) {
            const int n = k - nmult;
            proj(k, t) = std::polar(1.0 / nq, -n * th);
            synth(t, k) = std::polar(1.0, n * th);
        }
    }
}

// Analytic single layer of the free log kernel on a circle of radius R in the
// e^{i n theta} basis: diagonal with entries R log R (n = 0), -R/(2|n|) else.
inline Eigen::VectorXd log_self_diagonal(double R, int nmult) {
    const int nb = 2 * nmult + 1;
    Eigen::VectorXd d(nb);
    for (int k = 0; k < nb; ++k) {
        const int n = k - nmult;
        d(k) = n == 0 ? R * std::log(R) : -R / (2.0 * std::abs(n));
    }
    return d;
}

} // namespace detail

// Discretized quasiperiodic single layer potential on the two disks of the
// unit cell, in the per-circle Fourier basis. Maps density coefficients to
// boundary-trace coefficients; size 2(2*nmult+1).
inline Eigen::MatrixXcd assemble_single_layer(const ChainGeometry& geom,
                                              const QuasiPeriodicity& qp,
                                              const CapacitanceOptions& opts = {}) {
    qp.require_nonzero();
    if (opts.nmult < 1) throw assembly_error("nmult must be >= 1");
    const int nmult = opts.nmult;
    const int nq = opts.resolve_quad(nmult);
    const int nb = 2 * nmult + 1;
    const double R = geom.radius();

    Eigen::MatrixXcd proj, synth;
    detail::fourier_mats(nmult, nq, proj, synth);

    const double cx[2] = {geom.center1().x, geom.center2().x};
    std::vector<double> cth(nq), sth(nq);
    for (int t = 0; t < nq; ++t) {
        cth[t] = R * std::cos(2.0 * M_PI * t / nq);
        sth[t] = R * std::sin(2.0 * M_PI * t / nq);
    }

    Eigen::MatrixXcd S(2 * nb, 2 * nb);
    Eigen::MatrixXcd K(nq, nq);
    for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
            for (int t = 0; t < nq; ++t) {
                const Vec2 x{cx[p] + cth[t], sth[t]};
                for (int t2 = 0; t2 < nq; ++t2) {
                    const Vec2 y{cx[q] + cth[t2], sth[t2]};
                    K(t, t2) = p == q ? qp_green_regularized(x, y, qp, opts.green)
                                      : qp_green_quasistatic(x, y, qp, opts.green);
                }
            }
            Eigen::MatrixXcd blk = proj * K * synth * (2.0 * M_PI * R / nq);
            if (p == q) blk += detail::log_self_diagonal(R, nmult).asDiagonal();
            S.block(p * nb, q * nb, nb, nb) = blk;
        }
    }
    return S;
}

// Capacitance via the boundary solve V_j = delta_ij on each circle. V_j is
// constant inside each disk, so the exterior flux equals the density and
// C_ij = -charge on circle i, i.e. -2 pi R times the n = 0 coefficient.
inline QuasiCapacitance capacitance_at(const ChainGeometry& geom, const QuasiPeriodicity& qp,
                                       const CapacitanceOptions& opts = {}) {
    const int nmult = opts.nmult;
    const int nb = 2 * nmult + 1;
    Eigen::MatrixXcd S = assemble_single_layer(geom, qp, opts);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(S);
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
        throw assembly_error("singular quasiperiodic single layer system (rcond " +
                             std::to_string(rc) + ")");
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2 * nb, 2);
    rhs(0 * nb + nmult, 0) = 1.0;
    rhs(1 * nb + nmult, 1) = 1.0;
    Eigen::MatrixXcd phi = lu.solve(rhs);

    QuasiCapacitance out;
    out.alpha = qp.alpha;
    out.nmult = nmult;
    const double R = geom.radius();
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
            out.C(i, j) = -2.0 * M_PI * R * phi(i * nb + nmult, j);
    out.residual = out.structure_defect();
    return out;
}

// Midpoint grid of n alpha values on (-pi/L, pi/L], symmetric under negation
// and avoiding both alpha = 0 and the zone edge.
inline std::vector<double> alpha_grid(double L, int n) {
    std::vector<double> a(n);
    for (int k = 0; k < n; ++k) a[k] = (k + 0.5 - n / 2.0) * (2.0 * M_PI / (L * n));
    return a;
}

// Sweep over a symmetric grid; negative-alpha samples are filled by conjugate
// reciprocity C(-a) = conj C(a), keeping the sweep bitwise mirror-symmetric.
inline std::vector<QuasiCapacitance> capacitance_sweep(const ChainGeometry& geom,
                                                       const std::vector<double>& alphas,
                                                       const CapacitanceOptions& opts = {}) {
    const double L = geom.period();
    const std::size_t n = alphas.size();
    std::vector<QuasiCapacitance> out(n);
    std::vector<char> done(n, 0);

    std::vector<std::size_t> compute_idx;
    std::vector<std::ptrdiff_t> mirror_of(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (alphas[i] > 0) { compute_idx.push_back(i); continue; }
        bool mirrored = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(alphas[j] + alphas[i]) < 1e-15 * (2 * M_PI / L)) {
                mirror_of[i] = static_cast<std::ptrdiff_t>(j);
                mirrored = true;
                break;
            }
        }
        if (!mirrored) compute_idx.push_back(i);
    }
    parallel_for(compute_idx.size(), opts.threads, [&](std::size_t k) {
        const std::size_t i = compute_idx[k];
        out[i] = capacitance_at(geom, QuasiPeriodicity(alphas[i], L), opts);
        done[i] = 1;
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        const auto& src = out[static_cast<std::size_t>(mirror_of[i])];
        out[i] = src;
        out[i].alpha = alphas[i];
        out[i].C = src.C.conjugate();
    }
    return out;
}

struct GammaPointCapacitance {
    Eigen::Matrix2d C0 = Eigen::Matrix2d::Zero();    // extrapolated alpha -> 0 limit
    Eigen::Matrix2d Cpi = Eigen::Matrix2d::Zero();   // alpha = pi/L
    double identity_defect = 0.0;                    // |C12^0 + C11^0| / C11^0
    double extrapolation_defect = 0.0;               // eps vs eps/2 relative change
};

// Gamma-point pair (C^0, C^{pi/L}). C^0 is Richardson-extrapolated from
// alpha = eps, 2*eps. The sweep data shows C^alpha - C^0 is linear in |alpha|
// (the m = 0 reciprocal term contributes a |alpha| kink), so the first-order
// formula 2C(eps) - C(2eps) is the consistent one.
inline GammaPointCapacitance capacitance_at_gamma_points(const ChainGeometry& geom,
                                                         const CapacitanceOptions& opts = {},
                                                         double identity_tol = 1e-4) {
    const double L = geom.period();
    const double eps = opts.gamma_eps_frac * M_PI / L;

    auto extrapolate = [&](double e) {
        auto C1 = capacitance_at(geom, QuasiPeriodicity(e, L), opts);
        auto C2 = capacitance_at(geom, QuasiPeriodicity(2 * e, L), opts);
        Eigen::Matrix2cd C0 = 2.0 * C1.C - C2.C;
        return Eigen::Matrix2d(C0.real());
    };

    GammaPointCapacitance out;
    out.C0 = extrapolate(eps);
    Eigen::Matrix2d half = extrapolate(eps / 2);
    out.extrapolation_defect = (out.C0 - half).norm() / out.C0.norm();
    out.C0 = half; // keep the finer of the two

    auto cpi = capacitance_at(geom, QuasiPeriodicity(M_PI / L, L), opts);
    out.Cpi = cpi.C.real();

    out.identity_defect = std::abs(out.C0(0, 1) + out.C0(0, 0)) / out.C0(0, 0);
    if (out.identity_defect > identity_tol)
        throw accuracy_error("gamma-point identity C12^0 = -C11^0 violated",
                             out.identity_defect);
    return out;
}

// Inverse Floquet coefficients C^m = (L/2pi) int C^alpha e^{-i alpha m L} da on
// a uniform midpoint grid. Reconstruction: C^alpha ~= sum_m C^m e^{+i alpha m L}.
inline std::vector<RealSpaceCapacitance> realspace_coeffs(const ChainGeometry& geom,
                                                          int m_max, int grid_size,
                                                          const CapacitanceOptions& opts = {}) {
    if (grid_size < 64 || grid_size % 2 != 0)
        throw assembly_error("realspace grid_size must be even and >= 64");
    if (m_max < 1) throw assembly_error("m_max must be >= 1");
    const double L = geom.period();
    auto alphas = alpha_grid(L, grid_size);
    auto caps = capacitance_sweep(geom, alphas, opts);

    double scale = caps[0].C.norm();
    std::vector<RealSpaceCapacitance> out;
    out.reserve(2 * m_max + 1);
    double worst_imag = 0.0;
    for (int m = -m_max; m <= m_max; ++m) {
        Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
        for (std::size_t k = 0; k < caps.size(); ++k)
            acc += caps[k].C * std::polar(1.0 / grid_size, -alphas[k] * m * L);
        worst_imag = std::max(worst_imag, acc.imag().norm());
        RealSpaceCapacitance rc;
        rc.m = m;
        rc.C = acc.real();
        out.push_back(rc);
    }
    if (worst_imag > 1e-8 * scale)
        throw accuracy_error("realspace coefficients have non-negligible imaginary part",
                             worst_imag / scale);
    return out;
}

} // namespace nhchain
