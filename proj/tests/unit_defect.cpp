#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nhchain/defect.hpp"

using namespace nhchain;
using Catch::Approx;

namespace {
const ChainGeometry GEOM = build_periodic(1.0, 0.5, 6.0);

MaterialConfig mats(complexd k1, complexd k2) {
    MaterialConfig m;
    m.kappa1 = k1;
    m.kappa2 = k2;
    return m;
}

const EdgeParameters& edge() {
    static EdgeParameters e = edge_parameters(GEOM);
    return e;
}
}

TEST_CASE("edge parameters of the default chain") {
    const auto& e = edge();
    CHECK(e.lambda1 > 0.0);
    CHECK(e.lambda1 < e.lambda2);
    CHECK(e.l > 1.0);
    CHECK(e.lambda1 == Approx(2.3579528).epsilon(1e-5));
    CHECK(e.lambda2 == Approx(9.5697367).epsilon(1e-5));
    CHECK(e.l == Approx(1.6539167).epsilon(1e-5));

    // stability under multipole refinement
    CapacitanceOptions fine;
    fine.nmult = 12;
    auto ef = edge_parameters(GEOM, fine);
    CHECK(ef.lambda1 == Approx(e.lambda1).epsilon(1e-6));
    CHECK(ef.lambda2 == Approx(e.lambda2).epsilon(1e-6));

    // swapped roles keep both edge values positive
    auto es = edge_parameters(GEOM.swapped());
    CHECK(es.lambda2 > 0.0);
}

TEST_CASE("decay root identities over random parameters") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0), ul(1.01, 8.0);
    for (int k = 0; k < 1000; ++k) {
        const complexd k1{1.0 + 0.5 * u(rng), u(rng)};
        const complexd k2{1.0 + 0.5 * u(rng), u(rng)};
        const double l = ul(rng);
        auto [bp, bm] = decay_roots(k1, k2, l);
        CHECK(std::abs(bp * bm + k1 / k2) < 1e-12 * (1.0 + std::abs(k1 / k2)));
        CHECK(std::abs(bp + bm - l * (1.0 - k1 / k2)) < 1e-12 * (1.0 + std::abs(l * k1 / k2)));
    }
}

TEST_CASE("balanced hermitian case has unit roots") {
    auto [bp, bm] = decay_roots(1.0, 1.0, edge().l);
    CHECK(std::abs(bp - 1.0) < 1e-14);
    CHECK(std::abs(bm + 1.0) < 1e-14);
}

TEST_CASE("unbroken PT roots sit on the unit circle") {
    const double l = edge().l;
    const double threshold = 1.0 / std::sqrt(l * l - 1.0);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double t = u(rng) * threshold;
        auto [bp, bm] = decay_roots({1.0, t}, {1.0, -t}, l);
        CHECK(std::abs(std::abs(bp) - 1.0) < 1e-12);
        CHECK(std::abs(std::abs(bm) - 1.0) < 1e-12);
    }
    // continuity across the classification boundary; the radicand vanishes
    // there, so the square root amplifies rounding to ~1e-8
    auto [bp, bm] = decay_roots({1.0, threshold}, {1.0, -threshold}, l);
    CHECK(std::abs(std::abs(bp) - 1.0) < 1e-7);
    CHECK(std::abs(std::abs(bm) - 1.0) < 1e-7);
}

TEST_CASE("figure decay magnitudes") {
    const double l = edge().l;
    auto [bp8, bm8] = decay_roots({1.0, 1.38}, {1.0, -1.42}, l);
    CHECK(std::min(std::abs(bp8), std::abs(bm8)) == Approx(0.44).margin(0.03));
    auto [bp9, bm9] = decay_roots({1.0, 0.8}, {1.0, -0.6}, l);
    CHECK(std::min(std::abs(bp9), std::abs(bm9)) == Approx(0.88).margin(0.03));
}

TEST_CASE("swap symmetry maps the root set to reciprocal-scaled images") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        const complexd k1{1.0, u(rng)}, k2{1.0, u(rng)};
        const double l = 1.2 + std::abs(u(rng));
        auto [bp, bm] = decay_roots(k1, k2, l);
        auto [sp, sm] = decay_roots(k2, k1, l);
        // the swapped quadratic has product -k2/k1 and sum l(1 - k2/k1):
        // exactly the reciprocals of the original root set
        const complexd i1 = 1.0 / bp, i2 = 1.0 / bm;
        const double match = std::min(std::abs(sp - i1) + std::abs(sm - i2),
                                      std::abs(sp - i2) + std::abs(sm - i1));
        CHECK(match < 1e-12 * (std::abs(sp) + std::abs(sm) + 1.0));
    }
}

TEST_CASE("PT classification") {
    const double l = edge().l;
    CHECK(classify_pt({1.0, 0.7}, {1.0, -0.7}, l) == PTClass::unbroken_pt);
    CHECK(classify_pt({1.0, 1.4}, {1.0, -1.4}, l) == PTClass::broken_pt);
    CHECK(classify_pt({1.0, 1.2}, {1.0, -1.6}, l) == PTClass::no_pt);
    const double thr = 1.0 / std::sqrt(l * l - 1.0);
    CHECK(classify_pt({1.0, thr}, {1.0, -thr}, l) == PTClass::unbroken_pt);
}

TEST_CASE("defect matrices limits") {
    QuasiCapacitance cap;
    cap.C << 2.0, complexd(-1.0, 0.3), complexd(-1.0, -0.3), 2.0;

    // b = 0 decouples: mu's are (kappa2/rho) eig(C)... the weight matrix
    // becomes rho/kappa2 I
    auto dm0 = defect_matrices(cap, {1.0, 0.5}, {2.0, -0.5}, 7000.0, 0.0);
    CHECK((dm0.A - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(cap.C);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> er(dm0.reduced);
    for (int i = 0; i < 2; ++i) {
        const complexd want = complexd(2.0, -0.5) / 7000.0 * es.eigenvalues()(i);
        const double d = std::min(std::abs(er.eigenvalues()(0) - want),
                                  std::abs(er.eigenvalues()(1) - want));
        CHECK(d < 1e-12);
    }

    // b = 1 with kappa1 = kappa2: both A and B drop rank, the reduction is
    // refused, and the generalized identity A v = (kappa/rho) B v holds on the
    // symmetric subspace
    const complexd kap{1.0, 0.25};
    const double rho = 7000.0;
    CHECK_THROWS_AS(defect_matrices(cap, kap, kap, rho, complexd(1.0, 0.0)), singular_matrix);
    Eigen::Matrix2cd A, B;
    A << 1.0, 1.0, 1.0, 1.0;
    B << rho / kap, rho / kap, rho / kap, rho / kap;
    Eigen::FullPivLU<Eigen::Matrix2cd> lu(A);
    CHECK(lu.rank() == 1);
    Eigen::Vector2cd sym(1.0, 1.0);
    CHECK((A * sym - kap / rho * (B * sym)).norm() < 1e-15);
}

TEST_CASE("closed-form mu against the direct eigensolve") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        QuasiCapacitance cap;
        const double c11 = 2.0 + u(rng);
        const complexd c12{u(rng), u(rng)};
        cap.C << c11, c12, std::conj(c12), c11;
        const complexd k1{1.0, 1.2 * u(rng)}, k2{1.0, 1.2 * u(rng)};
        const complexd b{0.8 * u(rng), 0.8 * u(rng)};
        const double rho = 7000.0;
        auto pt = mu_branch_point(cap, k1, k2, rho, b);
        const complexd mu1 = pt.pref * (pt.h + std::sqrt(pt.f));
        const complexd mu2 = pt.pref * (pt.h - std::sqrt(pt.f));
        DefectMatrices dm;
        try {
            dm = defect_matrices(cap, k1, k2, rho, b);
        } catch (const singular_matrix&) {
            continue;
        }
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(dm.reduced);
        const complexd e1 = es.eigenvalues()(0), e2 = es.eigenvalues()(1);
        const double d = std::min(std::abs(mu1 - e1) + std::abs(mu2 - e2),
                                  std::abs(mu1 - e2) + std::abs(mu2 - e1));
        CHECK(d < 1e-10 * (std::abs(mu1) + std::abs(mu2) + 1e-30));
    }
}

TEST_CASE("flat band at the strong gain/loss parameters") {
    auto mat = mats({1.0, 1.38}, {1.0, -1.42});
    auto pred = predict_defect(GEOM, mat);
    CHECK(pred.pt_class == PTClass::no_pt);
    CHECK(std::abs(pred.b0) == Approx(0.4409).margin(0.005));

    CHECK(pred.flat.flatness <= 1e-3);
    CHECK(pred.flat.other_flatness >= 1e-1);
    CHECK(pred.flat.curves.winding % 2 != 0);
    CHECK(pred.flat.curves.endpoint_defect < 1e-6);

    // mu_-^0 endpoint from the gamma-point identity
    auto gp = capacitance_at_gamma_points(GEOM);
    const complexd mu_m0 = 2.0 * gp.C0(0, 0) * mat.kappa1 * mat.kappa2 * (pred.b0 - 1.0) /
                           (mat.rho_bg * (pred.b0 * mat.kappa2 - mat.kappa1));
    CHECK(std::abs(pred.flat.mu - mu_m0) < 2e-3 * std::abs(mu_m0));

    // mu_+^0 = 0: at the extrapolated alpha -> 0 capacitance one branch is
    // exactly zero (C12^0 = -C11^0 collapses the factorization)
    QuasiCapacitance c0;
    c0.C = gp.C0.cast<complexd>();
    auto p0 = mu_branch_point(c0, mat.kappa1, mat.kappa2, mat.rho_bg, pred.b0);
    const complexd z1 = p0.pref * (p0.h + std::sqrt(p0.f));
    const complexd z2 = p0.pref * (p0.h - std::sqrt(p0.f));
    CHECK(std::min(std::abs(z1), std::abs(z2)) < 1e-3 * std::abs(pred.flat.mu));

    // frequency and residual certificate
    CHECK(pred.omega.real() > 0.0);
    const double res = quasi_defect_eigenproblem_residual(GEOM, mat, pred.b0, pred.flat.mu);
    CHECK(res <= 1e-3);

    // random (b, mu) far from the construction fails the certificate
    const double bogus =
        quasi_defect_eigenproblem_residual(GEOM, mat, complexd(0.3, 0.1), pred.flat.mu * 3.0);
    CHECK(bogus > 0.05);
}

TEST_CASE("flat-band mu stable under grid refinement") {
    auto mat = mats({1.0, 1.38}, {1.0, -1.42});
    DefectOptions coarse, fine;
    coarse.grid = 64;
    fine.grid = 128;
    auto e = edge();
    auto [bp, bm] = decay_roots(mat.kappa1, mat.kappa2, e.l);
    const complexd b0 = std::abs(bp) < 1.0 ? bp : bm;
    auto a = mu_flat_band(GEOM, mat, b0, coarse);
    auto b = mu_flat_band(GEOM, mat, b0, fine);
    CHECK(std::abs(a.mu - b.mu) < 1e-6 * std::abs(b.mu));
}

TEST_CASE("unbroken PT has no flat branch") {
    auto mat = mats({1.0, 0.7}, {1.0, -0.7});
    CHECK_THROWS_AS(predict_defect(GEOM, mat), no_flat_band);
    // and forcing a unit-circle b through mu_flat_band also fails
    auto e = edge();
    auto [bp, bm] = decay_roots(mat.kappa1, mat.kappa2, e.l);
    CHECK_THROWS_AS(mu_flat_band(GEOM, mat, 0.9 * bp, DefectOptions{}), no_flat_band);
}

TEST_CASE("hermitian balanced chain admits no decaying candidate") {
    // scan b over the unit disk with the balanced moduli: no (b, mu) built
    // from a zone-edge eigenvalue certifies a localized mode
    auto mat = mats(1.0, 1.0);
    DefectOptions opts;
    opts.grid = 32;
    opts.cap.nmult = 6;
    CapacitanceOptions copts;
    copts.nmult = 6;
    auto cpi = capacitance_at(GEOM, {M_PI / GEOM.period(), GEOM.period()}, copts);
    for (double br : {-0.6, -0.2, 0.3, 0.7}) {
        for (double bi : {-0.5, 0.0, 0.4}) {
            const complexd b{br, bi};
            if (std::abs(b) >= 1.0) continue;
            auto dm = defect_matrices(cpi, mat.kappa1, mat.kappa2, mat.rho_bg, b);
            Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(dm.reduced);
            for (int j = 0; j < 2; ++j) {
                const double res = quasi_defect_eigenproblem_residual(
                    GEOM, mat, b, es.eigenvalues()(j), opts);
                CHECK(res > 1e-2);
            }
        }
    }
}

TEST_CASE("defect frequency branch") {
    CHECK(std::abs(defect_frequency(0.0, GEOM)) == 0.0);
    CHECK(defect_frequency(complexd(M_PI, 0.0), GEOM) == complexd(1.0, 0.0));
}
