#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "nhchain/errors.hpp"
#include "nhchain/spectra.hpp"

namespace nhchain {

// Right/left eigenvector pair of C^{v,alpha} in the explicit gauge
//   u_j = (e^{-i phi_j}, 1)/sqrt(2),  conj(v_j) = (e^{i theta1}, e^{i theta2})/sqrt(2),
// normalized biorthogonally: <v_i, u_j> = delta_ij.
struct BiorthogonalPair {
    Eigen::Vector2cd u = Eigen::Vector2cd::Zero();
    Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
    complexd phase_factor{0.0, 0.0}; // e^{-i phi_j}
    complexd theta1_factor{0.0, 0.0}; // e^{i theta_j^(1)}
    complexd theta2_factor{0.0, 0.0}; // e^{i theta_j^(2)}

    complexd phi() const { return complexd(0.0, 1.0) * std::log(phase_factor); }
};

inline complexd biortho_inner(const Eigen::Vector2cd& v, const Eigen::Vector2cd& u) {
    return v.dot(u); // sum conj(v_i) u_i
}

namespace detail {

// Build the pair for one band given its continued eigenvalue. The second row
// of the eigen-equation fixes e^{-i phi} = (rho lambda / kappa2 - C11)/conj(C12),
// avoiding a separate square-root branch choice. The left phases follow from
//   e^{i(th1 - th2 + phi)} = k2 conj(C12) / (k1 C12),  e^{i(th1-phi)} + e^{i th2} = 2.
inline BiorthogonalPair pair_for_lambda(const QuasiCapacitance& cap, const MaterialConfig& mat,
                                        complexd lambda) {
    const double C11 = cap.c11();
    const complexd C12 = cap.c12();
    if (std::abs(C12) < 1e-14 * std::abs(C11))
        throw gauge_undefined("C12 = 0: eigenvector gauge undefined");
    const complexd E = (mat.rho_bg * lambda / mat.kappa2 - C11) / std::conj(C12);
    const complexd W = mat.kappa2 * std::conj(C12) / (mat.kappa1 * C12);
    const complexd denom = 1.0 + W * E * E;
    if (std::abs(denom) < 1e-12)
        throw exceptional_point("eigenvectors coalesce; biorthogonal system undefined");
    const complexd Q = 2.0 / denom;
    const complexd P = W * Q * E;

    BiorthogonalPair out;
    out.phase_factor = E;
    out.theta1_factor = P;
    out.theta2_factor = Q;
    const double s = 1.0 / std::sqrt(2.0);
    out.u << s * E, s;
    out.v << s * std::conj(P), s * std::conj(Q);
    return out;
}

// Degeneracy test on the radicand itself (EP <=> radicand = 0); testing the
// eigenvalue gap would square-root-amplify rounding noise near the EP.
inline void require_separable(const QuasiCapacitance& cap, const MaterialConfig& mat) {
    const complexd half = 0.5 * (mat.kappa1 - mat.kappa2) * cap.c11();
    const complexd rad = half * half + mat.kappa1 * mat.kappa2 * std::norm(cap.c12());
    const double scale = std::norm(half) + std::abs(mat.kappa1 * mat.kappa2) * std::norm(cap.c12());
    if (std::abs(rad) < 1e-12 * scale)
        throw exceptional_point("bands degenerate at alpha = " + std::to_string(cap.alpha));
}

} // namespace detail

// Biorthogonal eigensystem at one alpha, ordered as the closed-form pair.
inline std::array<BiorthogonalPair, 2> biorthogonal_eigensystem(const QuasiCapacitance& cap,
                                                                const MaterialConfig& mat) {
    if (std::abs(cap.c12()) < 1e-14 * std::abs(cap.c11()))
        throw gauge_undefined("C12 = 0: eigenvector gauge undefined");
    detail::require_separable(cap, mat);
    auto [l1, l2] = band_eigenvalues(cap, mat);
    return {detail::pair_for_lambda(cap, mat, l1), detail::pair_for_lambda(cap, mat, l2)};
}

// e^{-i phi_j} along the band, continuation-consistent with the band labels.
inline std::vector<complexd> phase_factor_trace(const BandSpectrum& spec,
                                                const MaterialConfig& mat, int band) {
    std::vector<complexd> out(spec.caps.size());
    for (std::size_t i = 0; i < spec.caps.size(); ++i)
        out[i] = detail::pair_for_lambda(spec.caps[i], mat, spec.lambdas[i][band]).phase_factor;
    return out;
}

// Winding number of a closed polyline about a point.
inline long winding_number(const std::vector<complexd>& curve, complexd point) {
    double total = 0.0;
    const std::size_t n = curve.size();
    for (std::size_t i = 0; i < n; ++i) {
        const complexd a = curve[i] - point;
        const complexd b = curve[(i + 1) % n] - point;
        if (std::abs(a) < 1e-12 || std::abs(b) < 1e-12)
            throw singular_winding("curve passes through the winding point");
        total += std::arg(b / a);
    }
    const double w = total / (2.0 * M_PI);
    const long rounded = std::lround(w);
    if (std::abs(w - rounded) > 1e-6)
        throw singular_winding("non-integer winding: curve under-resolved");
    return rounded;
}

struct ZakResult {
    double phi1 = 0.0;
    double phi2 = 0.0;
    int grid = 0;
    double gauge_defect = 0.0; // worst |<v,u> - 1| along the loop

    double total() const { return phi1 + phi2; }
    double band(int j) const { return j == 0 ? phi1 : phi2; }
};

// Discrete biorthogonal Wilson loop over the periodic grid. The two-sided
// (symmetrized) product is used: the one-sided sum -Im sum log<v_k, u_{k+1}>
// carries an O(h) error whose density Im[<v,u''> - <v,u'>^2] does not vanish
// for non-Hermitian pairs, while the forward/backward average leaves only a
// total derivative at that order and converges at O(h^2). It keeps the total
// phase quantized on any grid and is invariant under per-alpha rescaling
// u -> s u, v -> v / conj(s).
inline ZakResult zak_phases(const BandSpectrum& spec, const MaterialConfig& mat) {
    if (!spec.separable) throw degenerate_band("Zak phase undefined: bands not separable");
    const std::size_t n = spec.caps.size();
    ZakResult out;
    out.grid = static_cast<int>(n);
    for (int band = 0; band < 2; ++band) {
        std::vector<BiorthogonalPair> pairs(n);
        for (std::size_t i = 0; i < n; ++i)
            pairs[i] = detail::pair_for_lambda(spec.caps[i], mat, spec.lambdas[i][band]);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = pairs[i];
            const auto& b = pairs[(i + 1) % n];
            const complexd fwd = biortho_inner(a.v, b.u);
            const complexd bwd = biortho_inner(b.v, a.u);
            if (std::abs(fwd) < 1e-12 || std::abs(bwd) < 1e-12)
                throw ill_conditioned_loop("Wilson-loop overlap vanishes");
            acc += 0.5 * (std::arg(fwd) - std::arg(bwd));
            out.gauge_defect = std::max(out.gauge_defect, std::abs(biortho_inner(a.v, a.u) - 1.0));
        }
        // report in (-pi, pi]
        double phi = -acc;
        phi -= 2.0 * M_PI * std::floor(phi / (2.0 * M_PI) + 0.5);
        (band == 0 ? out.phi1 : out.phi2) = phi;
    }
    return out;
}

inline double zak_phase(const BandSpectrum& spec, const MaterialConfig& mat, int band) {
    return zak_phases(spec, mat).band(band);
}

// Sum of the two band phases; quantized to multiples of pi (zero for the
// topologically trivial cell), asserted within tolerance.
inline double total_zak(const BandSpectrum& spec, const MaterialConfig& mat,
                        double quantization_tol = 1e-2) {
    auto z = zak_phases(spec, mat);
    const double t = z.total();
    const double frac = std::abs(t / M_PI - std::round(t / M_PI));
    if (frac > quantization_tol / M_PI)
        throw accuracy_error("total Zak phase not quantized; refine the grid", frac);
    return t;
}

} // namespace nhchain
