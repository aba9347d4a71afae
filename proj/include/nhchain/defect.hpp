#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "nhchain/errors.hpp"
#include "nhchain/spectra.hpp"
#include "nhchain/topology.hpp"

namespace nhchain {

// Band-edge values of the periodic chain: lambda1 = C11 + C12 at pi/L,
// lambda2 = 2 C11 at 0, and l = (l2 + l1)/(l2 - l1).
struct EdgeParameters {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double l = 0.0;
};

inline EdgeParameters edge_parameters(const ChainGeometry& geom,
                                      const CapacitanceOptions& opts = {}) {
    auto gp = capacitance_at_gamma_points(geom, opts);
    EdgeParameters out;
    out.lambda1 = gp.Cpi(0, 0) + gp.Cpi(0, 1);
    out.lambda2 = 2.0 * gp.C0(0, 0);
    if (!(out.lambda1 > 0.0 && out.lambda1 < out.lambda2))
        throw accuracy_error("edge parameters violate 0 < lambda1 < lambda2",
                             out.lambda1 / out.lambda2);
    out.l = (out.lambda2 + out.lambda1) / (out.lambda2 - out.lambda1);
    return out;
}

// Roots of  b^2 - l(1 - k1/k2) b - k1/k2 = 0:
//   b_pm = ( l(1 - k1/k2) pm sqrt( l^2 (1 - k1/k2)^2 + 4 k1/k2 ) ) / 2.
inline std::pair<complexd, complexd> decay_roots(complexd kappa1, complexd kappa2, double l) {
    if (std::abs(kappa2) == 0.0) throw singular_matrix("kappa2 = 0 in decay roots");
    if (!(l > 1.0)) throw accuracy_error("decay roots require l > 1", l);
    const complexd t = l * (1.0 - kappa1 / kappa2);
    const complexd r = std::sqrt(t * t + 4.0 * kappa1 / kappa2);
    return {0.5 * (t + r), 0.5 * (t - r)};
}

enum class PTClass { unbroken_pt, broken_pt, no_pt };

inline const char* to_string(PTClass c) {
    switch (c) {
        case PTClass::unbroken_pt: return "UnbrokenPT";
        case PTClass::broken_pt: return "BrokenPT";
        default: return "NoPT";
    }
}

// kappa1 = conj(kappa2) with |Im kappa| <= Re(kappa)/sqrt(l^2-1) is unbroken PT
// (both decay roots on the unit circle, no localized mode); larger gain/loss
// breaks the symmetry; unequal conjugates have no PT symmetry at all.
inline PTClass classify_pt(complexd kappa1, complexd kappa2, double l) {
    if (!(l > 1.0)) throw accuracy_error("classify_pt requires l > 1", l);
    const double scale = std::max(std::abs(kappa1), std::abs(kappa2));
    if (std::abs(kappa1 - std::conj(kappa2)) > 1e-12 * scale) return PTClass::no_pt;
    const double threshold = kappa1.real() / std::sqrt(l * l - 1.0);
    return std::abs(kappa1.imag()) <= threshold ? PTClass::unbroken_pt : PTClass::broken_pt;
}

struct DefectMatrices {
    Eigen::Matrix2cd A;
    Eigen::Matrix2cd B;
    Eigen::Matrix2cd reduced; // B^{-1} C^alpha A
};

inline DefectMatrices defect_matrices(const QuasiCapacitance& cap, complexd kappa1,
                                      complexd kappa2, double rho, complexd b) {
    DefectMatrices out;
    out.A << 1.0, b, b, 1.0;
    out.B << rho / kappa2, rho * b / kappa1, rho * b / kappa1, rho / kappa2;
    const complexd det = out.B(0, 0) * out.B(1, 1) - out.B(0, 1) * out.B(1, 0);
    if (std::abs(det) < 1e-14 * out.B.squaredNorm())
        throw singular_matrix("B matrix singular in defect reduction");
    out.reduced = out.B.inverse() * (cap.C * out.A);
    return out;
}

// Closed-form eigenvalue pair mu_j^alpha(b) of B^{-1} C^alpha A:
//   prefactor k1 k2 / (rho (b^2 k2^2 - k1^2)) times h(alpha) -+ sqrt(f(alpha)),
//   h = C11 (b^2 k2 - k1) + b (k2 - k1) Re C12,
//   f = h^2 - (b^2-1)(b^2 k2^2 - k1^2)(C11^2 - |C12|^2).
struct MuBranchPoint {
    complexd h;
    complexd f;
    complexd g;     // (C12 (b^2 k2 - k1) + C11 b (k2 - k1))^2; equals f where C12 is real
    complexd pref;
};

inline MuBranchPoint mu_branch_point(const QuasiCapacitance& cap, complexd k1, complexd k2,
                                     double rho, complexd b) {
    const double C11 = cap.c11();
    const complexd C12 = cap.c12();
    MuBranchPoint out;
    out.h = C11 * (b * b * k2 - k1) + b * (k2 - k1) * C12.real();
    out.f = out.h * out.h -
            (b * b - 1.0) * (b * b * k2 * k2 - k1 * k1) * (C11 * C11 - std::norm(C12));
    const complexd groot = C12 * (b * b * k2 - k1) + C11 * b * (k2 - k1);
    out.g = groot * groot;
    out.pref = k1 * k2 / (rho * (b * b * k2 * k2 - k1 * k1));
    return out;
}

// f and g samples over the half zone [0, pi/L] plus the closed concatenated
// loop gamma = f forward, g backward (they agree at both ends, where C12 is
// real); odd winding of gamma about the origin signals the branch swap that a
// flat band requires.
struct BranchCurves {
    std::vector<double> alphas;     // grid over the full zone
    std::vector<complexd> f;
    std::vector<complexd> g;
    std::vector<complexd> gamma_loop;
    long winding = 0;
    double endpoint_defect = 0.0;   // max rel |f - g| at alpha = 0, pi/L
};

struct FlatBandResult {
    complexd mu = 0.0;              // mean of the flat branch
    double flatness = 0.0;          // max_alpha |mu(alpha) - mu| / |mu|
    double other_flatness = 0.0;    // same for the rejected branch
    int flat_branch = 0;
    std::vector<std::array<complexd, 2>> mu_samples; // continued branches per alpha
    BranchCurves curves;
};

struct DefectOptions {
    int grid = 128;
    double flatness_threshold = 1e-3;
    CapacitanceOptions cap;
};

// Evaluate both mu branches over the zone with a continuously chosen square
// root. The sign of sqrt(f) is seeded at the zone edge alpha = pi/L from the
// explicit factorization sqrt(f) = g-root (C12 real there) and continued by
// nearest-sign choice toward alpha = -pi/L. The winding test on the
// concatenated f/g loop is computed independently as a diagnostic.
inline FlatBandResult mu_flat_band(const ChainGeometry& geom, const MaterialConfig& mat,
                                   complexd b0, const DefectOptions& opts = {}) {
    if (!(std::abs(b0) < 1.0))
        throw accuracy_error("mu_flat_band needs the decaying root |b0| < 1", std::abs(b0));
    const double L = geom.period();
    auto alphas = alpha_grid(L, opts.grid);
    auto caps = capacitance_sweep(geom, alphas, opts.cap);
    const std::size_t n = caps.size();

    std::vector<MuBranchPoint> pts(n);
    for (std::size_t i = 0; i < n; ++i)
        pts[i] = mu_branch_point(caps[i], mat.kappa1, mat.kappa2, mat.rho_bg, b0);

    // seed sqrt(f) at the last grid point (alpha closest to +pi/L)
    std::vector<complexd> root(n);
    {
        const complexd groot = std::sqrt(pts[n - 1].g);
        complexd r = std::sqrt(pts[n - 1].f);
        root[n - 1] = std::abs(r - groot) <= std::abs(-r - groot) ? r : -r;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        complexd r = std::sqrt(pts[k].f);
        root[k] = std::abs(r - root[k + 1]) <= std::abs(-r - root[k + 1]) ? r : -r;
    }

    FlatBandResult out;
    out.mu_samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.mu_samples[i] = {pts[i].pref * (pts[i].h + root[i]),
                             pts[i].pref * (pts[i].h - root[i])};

    double flat[2];
    complexd mean[2];
    for (int j = 0; j < 2; ++j) {
        complexd acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += out.mu_samples[i][j];
        mean[j] = acc / static_cast<double>(n);
        double dev = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            dev = std::max(dev, std::abs(out.mu_samples[i][j] - mean[j]));
        flat[j] = dev / std::abs(mean[j]);
    }
    out.flat_branch = flat[0] <= flat[1] ? 0 : 1;
    out.mu = mean[out.flat_branch];
    out.flatness = flat[out.flat_branch];
    out.other_flatness = flat[1 - out.flat_branch];

    // branch-swap diagnostic over [0, pi/L]
    out.curves.alphas = alphas;
    out.curves.f.resize(n);
    out.curves.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.curves.f[i] = pts[i].f;
        out.curves.g[i] = pts[i].g;
    }
    for (std::size_t i = n / 2; i < n; ++i) out.curves.gamma_loop.push_back(pts[i].f);
    for (std::size_t i = n; i-- > n / 2;) out.curves.gamma_loop.push_back(pts[i].g);
    out.curves.winding = winding_number(out.curves.gamma_loop, complexd(0.0, 0.0));
    // f = g holds exactly where C12 is real: at the zone edge and in the
    // extrapolated alpha -> 0 limit (the grid itself stops half a step short)
    {
        auto cpi = capacitance_at(geom, QuasiPeriodicity(M_PI / L, L), opts.cap);
        auto ppi = mu_branch_point(cpi, mat.kappa1, mat.kappa2, mat.rho_bg, b0);
        auto gp = capacitance_at_gamma_points(geom, opts.cap);
        QuasiCapacitance c0;
        c0.C = gp.C0.cast<complexd>();
        auto p0 = mu_branch_point(c0, mat.kappa1, mat.kappa2, mat.rho_bg, b0);
        out.curves.endpoint_defect =
            std::max(std::abs(ppi.f - ppi.g) / std::abs(ppi.f),
                     std::abs(p0.f - p0.g) / std::abs(p0.f));
    }

    if (out.flatness > opts.flatness_threshold)
        throw no_flat_band("no mu branch is flat at this b (flatness " +
                           std::to_string(out.flatness) + "); no localized-mode candidate");
    return out;
}

inline complexd defect_frequency(complexd mu, const ChainGeometry& geom) {
    return principal_omega(mu, geom.disk_area());
}

struct DefectPrediction {
    EdgeParameters edge;
    complexd b_plus = 0.0;
    complexd b_minus = 0.0;
    complexd b0 = 0.0;       // the root with |b0| < 1
    PTClass pt_class = PTClass::no_pt;
    FlatBandResult flat;
    complexd omega = 0.0;

    bool has_mode() const { return std::abs(b0) < 1.0; }
};

// Full prediction pipeline of the material-defect chain: edge parameters,
// decay roots, PT class, flat-band eigenvalue, frequency. Throws no_flat_band
// in the unbroken-PT regime (both roots on the unit circle).
inline DefectPrediction predict_defect(const ChainGeometry& geom, const MaterialConfig& mat,
                                       const DefectOptions& opts = {}) {
    DefectPrediction out;
    out.edge = edge_parameters(geom, opts.cap);
    auto [bp, bm] = decay_roots(mat.kappa1, mat.kappa2, out.edge.l);
    out.b_plus = bp;
    out.b_minus = bm;
    out.pt_class = classify_pt(mat.kappa1, mat.kappa2, out.edge.l);

    const double unit_tol = 1e-9;
    const bool p_in = std::abs(bp) < 1.0 - unit_tol;
    const bool m_in = std::abs(bm) < 1.0 - unit_tol;
    if (p_in && m_in)
        throw inconsistent_roots("both decay roots inside the unit disk");
    if (!p_in && !m_in)
        throw no_flat_band("both decay roots have unit modulus (unbroken PT): no simple "
                           "localized mode");
    out.b0 = p_in ? bp : bm;
    out.flat = mu_flat_band(geom, mat, out.b0, opts);
    out.omega = defect_frequency(out.flat.mu, geom);
    return out;
}

// Certifies the only-if condition of the defect construction: max over alpha
// of the smallest singular value of (B^{-1} C^alpha A - mu I), normalized by
// the matrix scale. Independent of the branch logic in mu_flat_band.
inline double quasi_defect_eigenproblem_residual(const ChainGeometry& geom,
                                                 const MaterialConfig& mat, complexd b,
                                                 complexd mu, const DefectOptions& opts = {}) {
    auto alphas = alpha_grid(geom.period(), opts.grid);
    auto caps = capacitance_sweep(geom, alphas, opts.cap);
    double worst = 0.0;
    for (const auto& cap : caps) {
        auto dm = defect_matrices(cap, mat.kappa1, mat.kappa2, mat.rho_bg, b);
        Eigen::Matrix2cd M = dm.reduced - mu * Eigen::Matrix2cd::Identity();
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(M);
        const double smin = svd.singularValues()(1);
        const double scale = dm.reduced.norm();
        worst = std::max(worst, smin / scale);
    }
    return worst;
}

} // namespace nhchain
