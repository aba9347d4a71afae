// Test-only reference implementations, independent of the multipole path:
//  - piecewise-constant collocation BEM on circular panels (quasiperiodic and
//    free-space kernels), with analytic log-part panel integrals
//  - energy-form capacitance quadrature over the truncated strip
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "nhchain/capacitance.hpp"
#include "nhchain/geometry.hpp"
#include "nhchain/green.hpp"

namespace oracle {

using nhchain::complexd;
using nhchain::Vec2;

// int_0^u log(2|sin(t/2)|) dt for |u| <= pi, via
// log(sin x / x) = -sum_n zeta(2n) (x/pi)^{2n} / n.
inline double log_sin_primitive(double u) {
    static const double zeta2n[] = {
        1.6449340668482264, 1.0823232337111382, 1.0173430619844492, 1.0040773561979443,
        1.0009945751278180, 1.0002460865533080, 1.0000612481350587, 1.0000152822594087,
        1.0000038172932650, 1.0000009539620338, 1.0000002384505027, 1.0000000596081891,
        1.0000000149015548, 1.0000000037253340, 1.0000000009313274, 1.0000000002328312};
    if (u == 0.0) return 0.0;
    const double s = u < 0 ? -1.0 : 1.0;
    const double a = std::abs(u);
    double val = a * (std::log(a) - 1.0);
    const double t2 = (a / (2.0 * M_PI)) * (a / (2.0 * M_PI));
    double p = t2;
    for (int n = 1; n <= 16; ++n) {
        val -= zeta2n[n - 1] * p * a / (n * (2 * n + 1));
        p *= t2;
    }
    return s * val;
}

// int over [u1, u2] of log(2 R |sin(u/2)|) du, interval's midpoint in (-pi, pi].
inline double log_arc_integral(double R, double u1, double u2) {
    auto F = [&](double u) {
        if (u > M_PI) return 2.0 * log_sin_primitive(M_PI) - log_sin_primitive(2.0 * M_PI - u);
        if (u < -M_PI) return -2.0 * log_sin_primitive(M_PI) + log_sin_primitive(u + 2.0 * M_PI);
        return log_sin_primitive(u);
    };
    return (u2 - u1) * std::log(R) + F(u2) - F(u1);
}

struct PanelGeometry {
    std::vector<Vec2> centers; // disk centers
    double R = 1.0;
    int npan = 512;

    int total() const { return static_cast<int>(centers.size()) * npan; }
    double theta(int t) const { return 2.0 * M_PI * (t + 0.5) / npan; }
    Vec2 point(int disk, double th) const {
        return {centers[disk].x + R * std::cos(th), centers[disk].y + R * std::sin(th)};
    }
};

// Dense collocation matrix; `kernel` evaluates the smooth remainder for
// same-disk pairs (full kernel minus the free log) and the full kernel across
// disks. Gauss-Legendre nodes handle the smooth parts; the log part on the
// own circle is integrated exactly.
template <typename FullK, typename RegK>
Eigen::MatrixXcd panel_matrix(const PanelGeometry& pg, FullK full, RegK reg) {
    static const double gx[2] = {-0.5773502691896257, 0.5773502691896257};
    static const double gw[2] = {1.0, 1.0};
    const int nd = static_cast<int>(pg.centers.size());
    const int n = pg.total();
    const double h = 2.0 * M_PI / pg.npan;
    Eigen::MatrixXcd A(n, n);
    for (int p = 0; p < nd; ++p) {
        for (int t = 0; t < pg.npan; ++t) {
            const Vec2 x = pg.point(p, pg.theta(t));
            for (int q = 0; q < nd; ++q) {
                for (int t2 = 0; t2 < pg.npan; ++t2) {
                    complexd val(0.0, 0.0);
                    for (int gi = 0; gi < 2; ++gi) {
                        const double th2 = pg.theta(t2) + 0.5 * h * gx[gi];
                        const Vec2 y = pg.point(q, th2);
                        val += gw[gi] * (p == q ? reg(x, y) : full(x, y));
                    }
                    val *= 0.5 * h * pg.R;
                    if (p == q) {
                        double um = pg.theta(t) - pg.theta(t2);
                        if (um > M_PI) um -= 2.0 * M_PI;
                        if (um < -M_PI) um += 2.0 * M_PI;
                        val += pg.R / (2.0 * M_PI) *
                               log_arc_integral(pg.R, um - h / 2, um + h / 2);
                    }
                    A(p * pg.npan + t, q * pg.npan + t2) = val;
                }
            }
        }
    }
    return A;
}

// Quasiperiodic two-disk capacitance by panel collocation.
inline Eigen::Matrix2cd bem_capacitance_qp(const nhchain::ChainGeometry& geom, double alpha,
                                           int npan = 512) {
    const nhchain::QuasiPeriodicity qp{alpha, geom.period()};
    PanelGeometry pg;
    pg.centers = {geom.center1(), geom.center2()};
    pg.R = geom.radius();
    pg.npan = npan;
    auto A = panel_matrix(
        pg, [&](const Vec2& x, const Vec2& y) { return nhchain::qp_green_quasistatic(x, y, qp); },
        [&](const Vec2& x, const Vec2& y) { return nhchain::qp_green_regularized(x, y, qp); });
    const double w = pg.R * 2.0 * M_PI / npan;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::Matrix2cd C;
    for (int j = 0; j < 2; ++j) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(pg.total());
        rhs.segment(j * npan, npan).setOnes();
        Eigen::VectorXcd phi = lu.solve(rhs);
        for (int i = 0; i < 2; ++i) C(i, j) = -w * phi.segment(i * npan, npan).sum();
    }
    return C;
}

// Free-space N-disk capacitance by panel collocation, neutral gauge (charge
// sum zero, unknown additive constant), matching nhchain::finite_capacitance.
inline Eigen::MatrixXd bem_capacitance_free(const nhchain::FiniteArrayLayout& layout,
                                            int npan = 256) {
    PanelGeometry pg;
    pg.centers = layout.centers;
    pg.R = layout.radius;
    pg.npan = npan;
    const int nd = static_cast<int>(pg.centers.size());
    const int n = pg.total();
    auto A0 = panel_matrix(
        pg, [&](const Vec2& x, const Vec2& y) { return complexd(nhchain::free_green_2d(x, y), 0.0); },
        [&](const Vec2&, const Vec2&) { return complexd(0.0, 0.0); });
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = A0.real();
    const double w = pg.R * 2.0 * M_PI / npan;
    for (int i = 0; i < n; ++i) {
        A(i, n) = 1.0;
        A(n, i) = w;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::MatrixXd C(nd, nd);
    for (int j = 0; j < nd; ++j) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
        rhs.segment(j * npan, npan).setOnes();
        Eigen::VectorXd phi = lu.solve(rhs);
        for (int i = 0; i < nd; ++i) C(i, j) = -w * phi.segment(i * npan, npan).sum();
    }
    return C;
}

// Exterior potential gradient of the multipole solution: analytic multipole
// continuation for the own-disk free-kernel part near the boundary, Ewald
// gradients for the lattice remainder and the other disk.
struct QpPotential {
    const nhchain::ChainGeometry* geom;
    nhchain::QuasiPeriodicity qp;
    int nmult, nq;
    Eigen::MatrixXcd phi; // density coefficients, column j

    // density values at quadrature nodes, column j
    Eigen::MatrixXcd node_density(int disk) const {
        const int nb = 2 * nmult + 1;
        Eigen::MatrixXcd vals(nq, 2);
        for (int t = 0; t < nq; ++t) {
            const double th = 2.0 * M_PI * t / nq;
            for (int j = 0; j < 2; ++j) {
                complexd acc = 0.0;
                for (int k = 0; k < nb; ++k)
                    acc += phi(disk * nb + k, j) * std::polar(1.0, (k - nmult) * th);
                vals(t, j) = acc;
            }
        }
        return vals;
    }
};

inline QpPotential solve_qp_densities(const nhchain::ChainGeometry& geom, double alpha,
                                      int nmult = 10) {
    nhchain::CapacitanceOptions opts;
    opts.nmult = nmult;
    const nhchain::QuasiPeriodicity qp{alpha, geom.period()};
    auto S = nhchain::assemble_single_layer(geom, qp, opts);
    const int nb = 2 * nmult + 1;
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2 * nb, 2);
    rhs(0 * nb + nmult, 0) = 1.0;
    rhs(1 * nb + nmult, 1) = 1.0;
    QpPotential out{&geom, qp, nmult, opts.resolve_quad(nmult), Eigen::MatrixXcd()};
    out.phi = Eigen::PartialPivLU<Eigen::MatrixXcd>(S).solve(rhs);
    return out;
}

// grad of V_j at exterior point x, j = 0, 1 packed as columns of a 2x2 matrix
// (rows: d/dx, d/dy).
inline Eigen::Matrix2cd qp_potential_gradient(const QpPotential& pot, const Vec2& x) {
    const auto& geom = *pot.geom;
    const double R = geom.radius();
    const int nb = 2 * pot.nmult + 1;
    const Vec2 centers[2] = {geom.center1(), geom.center2()};
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();

    for (int disk = 0; disk < 2; ++disk) {
        const double dx = x.x - centers[disk].x, dy = x.y - centers[disk].y;
        const double r = std::hypot(dx, dy);
        const bool near = r < 2.0 * R;
        const double th = std::atan2(dy, dx);
        for (int j = 0; j < 2; ++j) {
            complexd gx(0, 0), gy(0, 0);
            if (near) {
                // analytic free-kernel multipole continuation of the own disk
                complexd gr(0, 0), gth(0, 0);
                for (int k = 0; k < nb; ++k) {
                    const int n = k - pot.nmult;
                    const complexd c = pot.phi(disk * nb + k, j);
                    if (n == 0) {
                        gr += c * R / r;
                    } else {
                        const double rad = -R / (2.0 * std::abs(n)) * std::pow(R / r, std::abs(n));
                        const complexd e = std::polar(1.0, n * th);
                        gr += c * e * rad * (-std::abs(n) / r);
                        gth += c * e * rad * complexd(0.0, double(n)) / r;
                    }
                }
                gx += gr * (dx / r) - gth * (dy / r);
                gy += gr * (dy / r) + gth * (dx / r);
                // smooth lattice remainder by quadrature
                auto dens = pot.node_density(disk);
                for (int t = 0; t < pot.nq; ++t) {
                    const double tt = 2.0 * M_PI * t / pot.nq;
                    const Vec2 y{centers[disk].x + R * std::cos(tt), R * std::sin(tt)};
                    // gradient of (G - free) = full gradient minus free gradient
                    auto [fgx, fgy] = nhchain::qp_green_gradient(x, y, pot.qp);
                    const Vec2 fr = nhchain::free_green_gradient_2d(x, y);
                    const double w = 2.0 * M_PI * R / pot.nq;
                    gx += dens(t, j) * (fgx - fr.x) * w;
                    gy += dens(t, j) * (fgy - fr.y) * w;
                }
            } else {
                auto dens = pot.node_density(disk);
                for (int t = 0; t < pot.nq; ++t) {
                    const double tt = 2.0 * M_PI * t / pot.nq;
                    const Vec2 y{centers[disk].x + R * std::cos(tt), R * std::sin(tt)};
                    auto [fgx, fgy] = nhchain::qp_green_gradient(x, y, pot.qp);
                    const double w = 2.0 * M_PI * R / pot.nq;
                    gx += dens(t, j) * fgx * w;
                    gy += dens(t, j) * fgy * w;
                }
            }
            out(0, j) += gx;
            out(1, j) += gy;
        }
    }
    return out;
}

// C_ij = int_{Y \ D} conj(grad V_i) . grad V_j over the truncated strip:
// polar annuli near the disks, column-exact Cartesian quadrature elsewhere.
inline Eigen::Matrix2cd energy_capacitance(const nhchain::ChainGeometry& geom, double alpha,
                                           double strip_half_height = 70.0, int nmult = 10) {
    auto pot = solve_qp_densities(geom, alpha, nmult);
    const double R = geom.radius();
    const double Ra = R + 0.2;
    const double L = geom.period();
    const Vec2 centers[2] = {geom.center1(), geom.center2()};

    static const double g4x[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
    static const double g4w[4] = {0.3478548451374538, 0.6521451548625461,
                                  0.6521451548625461, 0.3478548451374538};

    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    auto add_point = [&](const Vec2& p, double w) {
        Eigen::Matrix2cd G = qp_potential_gradient(pot, p);
        acc += w * (G.adjoint() * G);
    };

    // polar annuli: composite 4-point Gauss panels in r, trapezoid in theta
    const int nrpanels = 3, nth = 72;
    for (int disk = 0; disk < 2; ++disk) {
        for (int panel = 0; panel < nrpanels; ++panel) {
            const double plo = R + (Ra - R) * panel / nrpanels;
            const double phi_r = R + (Ra - R) * (panel + 1) / nrpanels;
            for (int gi = 0; gi < 4; ++gi) {
                const double rr = 0.5 * (plo + phi_r) + 0.5 * (phi_r - plo) * g4x[gi];
                const double wr = 0.5 * (phi_r - plo) * g4w[gi];
                for (int it = 0; it < nth; ++it) {
                    const double tt = 2.0 * M_PI * it / nth;
                    const Vec2 p{centers[disk].x + rr * std::cos(tt), rr * std::sin(tt)};
                    add_point(p, wr * rr * (2.0 * M_PI / nth));
                }
            }
        }
    }

    // Cartesian strip minus the enlarged disks, mirror-symmetric in y
    auto ycut = [&](double x) {
        double c = 0.0;
        for (int d = 0; d < 2; ++d) {
            const double dx = x - centers[d].x;
            if (std::abs(dx) < Ra) c = std::max(c, std::sqrt(Ra * Ra - dx * dx));
        }
        return c;
    };
    // x panels aligned with the circle-edge abscissae, where ycut has kinks
    std::vector<double> xbreaks{-L / 2, L / 2};
    for (int d = 0; d < 2; ++d) {
        for (double e : {centers[d].x - Ra, centers[d].x + Ra})
            if (e > -L / 2 && e < L / 2) xbreaks.push_back(e);
    }
    std::sort(xbreaks.begin(), xbreaks.end());
    std::vector<std::pair<double, double>> xpanels;
    for (std::size_t b = 0; b + 1 < xbreaks.size(); ++b) {
        const double len = xbreaks[b + 1] - xbreaks[b];
        const int sub = std::max(1, static_cast<int>(std::ceil(len / 0.2)));
        for (int s = 0; s < sub; ++s)
            xpanels.emplace_back(xbreaks[b] + len * s / sub, xbreaks[b] + len * (s + 1) / sub);
    }
    for (const auto& [xlo, xhi] : xpanels) {
        for (int gi = 0; gi < 4; ++gi) {
            const double x = 0.5 * (xlo + xhi) + 0.5 * (xhi - xlo) * g4x[gi];
            const double wx = 0.5 * (xhi - xlo) * g4w[gi];
            const double y0 = ycut(x);
            // panels from y0 to strip_half_height, geometric growth
            double lo = y0;
            double width = 0.35;
            while (lo < strip_half_height) {
                const double hi = std::min(lo + width, strip_half_height);
                for (int gj = 0; gj < 4; ++gj) {
                    const double y = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g4x[gj];
                    const double wy = 0.5 * (hi - lo) * g4w[gj];
                    add_point({x, y}, 2.0 * wx * wy); // factor 2: mirror half
                }
                lo = hi;
                width *= 1.35;
            }
        }
    }
    return acc;
}

} // namespace oracle
