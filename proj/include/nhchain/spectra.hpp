#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nhchain/capacitance.hpp"
#include "nhchain/errors.hpp"
#include "nhchain/geometry.hpp"

namespace nhchain {

// Bulk moduli and densities. kappa1/kappa2 live in the resonators (complex,
// imaginary part = gain/loss); the background is real.
struct MaterialConfig {
    complexd kappa1{1.0, 0.0};
    complexd kappa2{1.0, 0.0};
    double kappa_bg = 7000.0;
    double rho_bg = 7000.0;
    double rho_b = 1.0;

    double delta() const { return rho_b / rho_bg; }
    double wave_speed() const { return std::sqrt(kappa_bg / rho_bg); }

    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (delta() > 0.01)
            w.push_back("density contrast delta = " + std::to_string(delta()) +
                        " is not small; subwavelength asymptotics degrade");
        if (std::abs(kappa1.real() - kappa2.real()) >
            1e-12 * std::max(std::abs(kappa1), std::abs(kappa2)))
            w.push_back("Re(kappa1) != Re(kappa2); periodic-problem assumptions not met");
        return w;
    }

    MaterialConfig swapped() const {
        MaterialConfig m = *this;
        std::swap(m.kappa1, m.kappa2);
        return m;
    }
    MaterialConfig conjugated() const {
        MaterialConfig m = *this;
        m.kappa1 = std::conj(kappa1);
        m.kappa2 = std::conj(kappa2);
        return m;
    }
};

// C^{v,alpha} = (1/rho) diag(kappa1, kappa2) C^alpha.
inline Eigen::Matrix2cd weighted_capacitance(const QuasiCapacitance& cap,
                                             const MaterialConfig& mat) {
    Eigen::Matrix2cd W;
    W.row(0) = (mat.kappa1 / mat.rho_bg) * cap.C.row(0);
    W.row(1) = (mat.kappa2 / mat.rho_bg) * cap.C.row(1);
    return W;
}

// Closed-form eigenvalue pair of the weighted capacitance matrix,
//   lambda_j = (1/rho) [ C11 (k1+k2)/2 + (-1)^j sqrt( ((k1-k2)/2)^2 C11^2
//                                                     + k1 k2 |C12|^2 ) ],
// with the principal square root. Band labels over a sweep are fixed by
// nearest-neighbor continuation, not by the (-1)^j sign.
inline std::pair<complexd, complexd> band_eigenvalues(const QuasiCapacitance& cap,
                                                      const MaterialConfig& mat) {
    const double C11 = cap.c11();
    const complexd C12 = cap.c12();
    const complexd k1 = mat.kappa1, k2 = mat.kappa2;
    const complexd half = 0.5 * (k1 - k2) * C11;
    const complexd rad = half * half + k1 * k2 * std::norm(C12);
    const complexd r = std::sqrt(rad);
    const complexd mean = 0.5 * (k1 + k2) * C11;
    return {(mean - r) / mat.rho_bg, (mean + r) / mat.rho_bg};
}

inline complexd principal_omega(complexd lambda, double disk_area) {
    complexd w = std::sqrt(lambda / disk_area);
    if (w.real() < 0.0 || (w.real() == 0.0 && w.imag() < 0.0)) w = -w;
    return w;
}

struct BandSpectrum {
    std::vector<double> alphas;
    std::vector<QuasiCapacitance> caps;
    // continuation-labelled eigenvalues of C^{v,alpha}, [i][j], j = 0, 1
    std::vector<std::array<complexd, 2>> lambdas;
    std::vector<std::array<complexd, 2>> omegas;
    bool separable = true;
    double min_gap = 0.0; // min over grid of |lambda2 - lambda1| / max |lambda|
    // grid indices where the nearest-neighbor continuation was ambiguous
    // (keep and swap assignments nearly equidistant)
    std::vector<std::size_t> ambiguous_samples;
};

struct BandOptions {
    int grid = 128;
    CapacitanceOptions cap;
};

namespace detail {

// Order the pair at each grid point for least total motion from the previous
// point; first point keeps the closed-form order. Nearly equidistant
// assignments are flagged rather than silently resolved.
inline void continue_labels(std::vector<std::array<complexd, 2>>& lams,
                            std::vector<std::size_t>* ambiguous = nullptr) {
    for (std::size_t i = 1; i < lams.size(); ++i) {
        const auto& prev = lams[i - 1];
        auto& cur = lams[i];
        const double keep = std::abs(cur[0] - prev[0]) + std::abs(cur[1] - prev[1]);
        const double swap = std::abs(cur[1] - prev[0]) + std::abs(cur[0] - prev[1]);
        if (ambiguous && std::abs(keep - swap) <
                             1e-6 * (std::abs(cur[0]) + std::abs(cur[1])))
            ambiguous->push_back(i);
        if (swap < keep) std::swap(cur[0], cur[1]);
    }
}

} // namespace detail

inline BandSpectrum band_structure(const ChainGeometry& geom, const MaterialConfig& mat,
                                   const BandOptions& opts = {}) {
    BandSpectrum out;
    out.alphas = alpha_grid(geom.period(), opts.grid);
    out.caps = capacitance_sweep(geom, out.alphas, opts.cap);
    out.lambdas.resize(out.caps.size());
    for (std::size_t i = 0; i < out.caps.size(); ++i) {
        auto [l1, l2] = band_eigenvalues(out.caps[i], mat);
        out.lambdas[i] = {l1, l2};
    }
    detail::continue_labels(out.lambdas, &out.ambiguous_samples);

    const double area = geom.disk_area();
    out.omegas.resize(out.lambdas.size());
    double max_lam = 0.0, min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.lambdas.size(); ++i) {
        out.omegas[i] = {principal_omega(out.lambdas[i][0], area),
                         principal_omega(out.lambdas[i][1], area)};
        max_lam = std::max({max_lam, std::abs(out.lambdas[i][0]), std::abs(out.lambdas[i][1])});
        min_gap = std::min(min_gap, std::abs(out.lambdas[i][1] - out.lambdas[i][0]));
    }
    out.min_gap = min_gap / max_lam;
    out.separable = out.min_gap > 1e-10;

    // The grid gap misses exceptional points that sit between nodes. In the
    // PT case the radicand of the closed form is real, and a sign change
    // across the zone certifies a degeneracy in the continuum; refuse
    // separability then regardless of the sampled gap.
    if (out.separable) {
        bool all_real = true;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : out.caps) {
            const complexd half = 0.5 * (mat.kappa1 - mat.kappa2) * c.c11();
            const complexd rad = half * half + mat.kappa1 * mat.kappa2 * std::norm(c.c12());
            if (std::abs(rad.imag()) > 1e-12 * std::abs(rad)) {
                all_real = false;
                break;
            }
            lo = std::min(lo, rad.real());
            hi = std::max(hi, rad.real());
        }
        if (all_real && lo < 0.0 && hi > 0.0) out.separable = false;
    }
    return out;
}

// Winding number of omega_2 - omega_1 around the origin across the Brillouin
// zone; zero for every separable spectrum of the parity-symmetric chain.
inline double vorticity(const BandSpectrum& spec) {
    if (!spec.separable)
        throw degenerate_band("vorticity undefined: bands touch on the grid");
    double total = 0.0;
    const std::size_t n = spec.omegas.size();
    for (std::size_t i = 0; i < n; ++i) {
        const complexd a = spec.omegas[i][1] - spec.omegas[i][0];
        const complexd b = spec.omegas[(i + 1) % n][1] - spec.omegas[(i + 1) % n][0];
        if (a == complexd(0.0) || b == complexd(0.0))
            throw degenerate_band("vorticity undefined: gap hits zero");
        total += std::arg(b / a);
    }
    return total / (2.0 * M_PI);
}

// Smallest Im(kappa) >= 0 (with kappa1 = conj(kappa2), Re = 1) at which the
// two bands degenerate somewhere in the zone. The radicand
//   t^2 C11^2 - (1+t^2)|C12|^2
// is negative near alpha = 0 for every t (there C11 = |C12|); an exceptional
// point appears once it crosses zero somewhere, i.e. once max_alpha of the
// radicand reaches zero. Bisection on t against that maximum.
inline double exceptional_threshold(const ChainGeometry& geom, const BandOptions& opts = {},
                                    double t_hi = 4.0, double tol = 1e-8) {
    auto alphas = alpha_grid(geom.period(), opts.grid);
    auto caps = capacitance_sweep(geom, alphas, opts.cap);
    auto max_radicand = [&](double t) {
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& c : caps) {
            const double c11 = c.c11(), c12 = std::abs(c.c12());
            mx = std::max(mx, t * t * c11 * c11 - (1.0 + t * t) * c12 * c12);
        }
        return mx;
    };
    double lo = 0.0, hi = t_hi;
    if (max_radicand(hi) < 0.0)
        throw not_found("no exceptional point for Im(kappa) in [0, " + std::to_string(t_hi) + "]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (max_radicand(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace nhchain
