#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "nhchain/errors.hpp"
#include "nhchain/geometry.hpp"

namespace nhchain {

using complexd = std::complex<double>;

namespace detail {

constexpr double euler_gamma = 0.57721566490153286060651209;

// Scaled complementary error function e^{x^2} erfc(x) for x >= 0.
inline double erfcx(double x) {
    if (x < 10.0) return std::exp(x * x) * std::erfc(x);
    // asymptotic expansion, relative error < 1e-12 for x >= 10
    const double ix2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2 * k - 1) * ix2;
        sum += term;
    }
    return sum / (x * std::sqrt(M_PI));
}

// e^{g*s} * erfc(a + s*eta) with a = g/(2 eta), stable for large |s|.
// The exponent identity g*s - (a + s*eta)^2 = -a^2 - s^2 eta^2 keeps the
// intermediate quantities bounded.
inline double exp_erfc(double g, double s, double eta) {
    const double a = g / (2.0 * eta);
    const double z = a + s * eta;
    if (z >= 0.0) return erfcx(z) * std::exp(-a * a - s * s * eta * eta);
    return 2.0 * std::exp(g * s) - erfcx(-z) * std::exp(-a * a - s * s * eta * eta);
}

// E1(x) = -Ei(-x), x > 0.
inline double expint_e1(double x) { return -std::expint(-x); }

// Entire part of the exponential integral: Ein(z) = E1(z) + log z + gamma.
inline double ein(double z) {
    if (z > 1e-6) return expint_e1(z) + std::log(z) + euler_gamma;
    return z * (1.0 - z / 4.0 + z * z / 18.0);
}

} // namespace detail

// Bloch quasiperiodicity reduced into the first Brillouin zone (-pi/L, pi/L].
struct QuasiPeriodicity {
    double alpha = 0.0;
    double L = 1.0;

    QuasiPeriodicity() = default;
    QuasiPeriodicity(double alpha_, double L_) : alpha(alpha_), L(L_) {
        if (!(L > 0.0)) throw invalid_geometry("period must be positive");
        reduce();
    }

    void reduce() {
        const double b = 2.0 * M_PI / L;
        alpha -= b * std::floor(alpha / b + 0.5);
        if (alpha <= -M_PI / L + 0.0) alpha += b; // map -pi/L to +pi/L
    }

    bool is_singular(double tol = 1e-14) const { return std::abs(alpha) * L < tol; }

    void require_nonzero() const {
        if (is_singular())
            throw singular_quasiperiodicity(
                "alpha = 0: quasi-static single layer not invertible; use the "
                "gamma-point extrapolation path");
    }
};

struct GreenEvalParams {
    double eta = 0.0;         // Ewald split; 0 selects sqrt(pi)/L
    double target_tol = 1e-10;
    int spectral_terms = 0;   // 0 = derive from target_tol
    int spatial_terms = 0;    // 0 = derive from target_tol

    double resolve_eta(double L) const { return eta > 0.0 ? eta : std::sqrt(M_PI) / L; }

    // erfc argument beyond which terms drop below target_tol
    double tail_arg() const {
        double t = std::max(target_tol, 1e-16);
        return std::sqrt(-std::log(t)) + 1.5;
    }
    int resolve_spectral(double L, double eta_v) const {
        if (spectral_terms > 0) return spectral_terms;
        return static_cast<int>(std::ceil(2.0 * eta_v * tail_arg() * L / (2.0 * M_PI))) + 2;
    }
    int resolve_spatial(double L, double eta_v) const {
        if (spatial_terms > 0) return spatial_terms;
        return static_cast<int>(std::ceil(tail_arg() / (eta_v * L))) + 2;
    }
};

// Free-space quasi-static kernel (1/2pi) log|x-y|.
inline double free_green_2d(const Vec2& x, const Vec2& y) {
    const double r = dist(x, y);
    if (r == 0.0) throw singular_evaluation("free_green_2d at coincident points");
    return std::log(r) / (2.0 * M_PI);
}

inline Vec2 free_green_gradient_2d(const Vec2& x, const Vec2& y) {
    const double dx = x.x - y.x, dy = x.y - y.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) throw singular_evaluation("free_green_gradient_2d at coincident points");
    return {dx / (2.0 * M_PI * r2), dy / (2.0 * M_PI * r2)};
}

namespace detail {

struct EwaldParts {
    complexd spectral;   // reciprocal-space sum (erfc-screened)
    complexd spatial_far;// image sum excluding the m=0 image
    double reg0;         // smooth remainder of the m=0 image after removing the log
    double log0;         // (1/2pi) log r0 of the m=0 image
};

// Ewald evaluation of the alpha-quasiperiodic Laplace Green's function
//   G(x,y) = sum_m (1/2pi) log|x - y - mL e1| e^{i alpha m L}
// in its k -> 0 spectral form G = -(1/2L) sum_q e^{iq chi} e^{-|q||s|} / |q|,
// q in alpha + (2pi/L)Z. Split parameter eta trades reciprocal against image
// terms; the total is eta-independent.
inline EwaldParts ewald_parts(double chi, double s, double alpha, double L,
                              const GreenEvalParams& p) {
    EwaldParts out{};
    const double eta = p.resolve_eta(L);
    const int Q = p.resolve_spectral(L, eta);
    const int P = p.resolve_spatial(L, eta) + static_cast<int>(std::ceil(std::abs(chi) / L));

    complexd acc(0.0, 0.0);
    double edge_term = 0.0;
    for (int m = -Q; m <= Q; ++m) {
        const double q = alpha + 2.0 * M_PI * m / L;
        const double g = std::abs(q);
        if (g * L < 1e-14) continue;
        const double both = exp_erfc(g, -s, eta) + exp_erfc(g, s, eta);
        if (std::abs(m) == Q) edge_term = std::max(edge_term, both / g / (4.0 * L));
        acc += std::polar(both / g, q * chi);
    }
    out.spectral = -acc / (4.0 * L);

    complexd acc2(0.0, 0.0);
    for (int n = -P; n <= P; ++n) {
        if (n == 0) continue;
        const double dx = chi - n * L;
        const double r2 = dx * dx + s * s;
        const double e1 = expint_e1(r2 * eta * eta);
        if (std::abs(n) == P) edge_term = std::max(edge_term, e1 / (4.0 * M_PI));
        if (e1 != 0.0) acc2 += std::polar(e1, alpha * n * L);
    }
    out.spatial_far = -acc2 / (4.0 * M_PI);
    // outermost retained terms bound the truncation tail; relevant when the
    // caller fixed the term counts by hand
    if (edge_term > p.target_tol)
        throw accuracy_error("Ewald truncation did not reach the target tolerance", edge_term);

    const double r0sq = chi * chi + s * s;
    // -(1/4pi) E1(eta^2 r^2) = (1/2pi) log r + (gamma + 2 log eta)/(4pi) - Ein/(4pi)
    out.reg0 = (euler_gamma + 2.0 * std::log(eta)) / (4.0 * M_PI) -
               ein(r0sq * eta * eta) / (4.0 * M_PI);
    out.log0 = r0sq > 0.0 ? 0.25 * std::log(r0sq) / M_PI
                          : -std::numeric_limits<double>::infinity();
    return out;
}

} // namespace detail

// Accelerated evaluation of the quasiperiodic quasi-static Green's function.
inline complexd qp_green_quasistatic(const Vec2& x, const Vec2& y,
                                     const QuasiPeriodicity& qp,
                                     const GreenEvalParams& params = {}) {
    qp.require_nonzero();
    const double chi = x.x - y.x, s = x.y - y.y;
    auto parts = detail::ewald_parts(chi, s, qp.alpha, qp.L, params);
    if (!std::isfinite(parts.log0))
        throw singular_evaluation("qp_green_quasistatic at a lattice-coincident point");
    return parts.spectral + parts.spatial_far + parts.reg0 + parts.log0;
}

// Same sum with the m = 0 free-space image removed; smooth as y -> x. This is
// the kernel the capacitance assembly pairs with the analytic log-on-a-circle
// diagonalization.
inline complexd qp_green_regularized(const Vec2& x, const Vec2& y,
                                     const QuasiPeriodicity& qp,
                                     const GreenEvalParams& params = {}) {
    qp.require_nonzero();
    auto parts = detail::ewald_parts(x.x - y.x, x.y - y.y, qp.alpha, qp.L, params);
    return parts.spectral + parts.spatial_far + parts.reg0;
}

// Gradient with respect to x of qp_green_quasistatic.
inline std::pair<complexd, complexd> qp_green_gradient(const Vec2& x, const Vec2& y,
                                                       const QuasiPeriodicity& qp,
                                                       const GreenEvalParams& params = {}) {
    qp.require_nonzero();
    const double chi = x.x - y.x, s = x.y - y.y;
    const double L = qp.L, alpha = qp.alpha;
    const double eta = params.resolve_eta(L);
    const int Q = params.resolve_spectral(L, eta);
    const int P = params.resolve_spatial(L, eta) + static_cast<int>(std::ceil(std::abs(chi) / L));

    complexd gx(0.0, 0.0), gy(0.0, 0.0);
    for (int m = -Q; m <= Q; ++m) {
        const double q = alpha + 2.0 * M_PI * m / L;
        const double g = std::abs(q);
        if (g * L < 1e-14) continue;
        const double plus = detail::exp_erfc(g, s, eta);
        const double minus = detail::exp_erfc(g, -s, eta);
        const complexd phase = std::polar(1.0, q * chi);
        // d/dchi: factor iq; d/ds: the Gaussian terms cancel pairwise
        gx += complexd(0.0, q) * phase * ((plus + minus) / g);
        gy += phase * (plus - minus);
    }
    gx *= -1.0 / (4.0 * L);
    gy *= -1.0 / (4.0 * L);

    for (int n = -P; n <= P; ++n) {
        const double dx = chi - n * L;
        const double r2 = dx * dx + s * s;
        if (r2 == 0.0) throw singular_evaluation("qp_green_gradient at a lattice point");
        const double w = std::exp(-r2 * eta * eta) / (2.0 * M_PI * r2);
        const complexd phase = std::polar(w, alpha * n * L);
        gx += phase * dx;
        gy += phase * s;
    }
    return {gx, gy};
}

// Brute-force spectral partial sum over |m| <= terms; the slow reference the
// accelerated path is checked against. Converges like 1/terms on the axis
// s = 0, exponentially otherwise.
inline complexd qp_green_spectral_reference(const Vec2& x, const Vec2& y,
                                            const QuasiPeriodicity& qp, long terms) {
    qp.require_nonzero();
    const double chi = x.x - y.x, s = std::abs(x.y - y.y);
    complexd acc(0.0, 0.0);
    for (long m = -terms; m <= terms; ++m) {
        const double q = qp.alpha + 2.0 * M_PI * m / qp.L;
        const double g = std::abs(q);
        if (g * qp.L < 1e-14) continue;
        acc += std::polar(std::exp(-g * s) / g, q * chi);
    }
    return -acc / (2.0 * qp.L);
}

} // namespace nhchain
