#include <catch2/catch_amalgamated.hpp>

#include "nhchain/geometry.hpp"

using namespace nhchain;

TEST_CASE("periodic cell from the default separations") {
    auto g = build_periodic(1.0, 0.5, 6.0);
    CHECK(g.period() == Catch::Approx(10.5));
    CHECK(g.center1().x == Catch::Approx(-1.25));
    CHECK(g.center2().x == Catch::Approx(1.25));
    CHECK(g.disk_area() == Catch::Approx(M_PI));
}

TEST_CASE("separation role swap keeps the period") {
    auto g = build_periodic(1.0, 6.0, 0.5);
    CHECK(g.period() == Catch::Approx(10.5));
    // the in-cell formula is +-(R + d/2); with d = 6 that is +-4
    CHECK(g.center2().x == Catch::Approx(4.0));
}

TEST_CASE("swapping separations is a half-period shift of the same crystal") {
    auto g = build_periodic(1.0, 2.0, 2.0);
    auto s = g.swapped();
    CHECK(g.period() == Catch::Approx(s.period()));
    // shift the swapped cell by L/2 and reduce mod L: same point set
    const double L = g.period();
    std::vector<double> a{g.center1().x, g.center2().x};
    std::vector<double> b{s.center1().x + L / 2, s.center2().x + L / 2};
    for (auto& x : b) x -= L * std::round(x / L);
    std::sort(b.begin(), b.end());
    CHECK(a[0] == Catch::Approx(b[0]).margin(1e-12));
    CHECK(a[1] == Catch::Approx(b[1]).margin(1e-12));
}

TEST_CASE("invalid separations rejected") {
    CHECK_THROWS_AS(build_periodic(1.0, -0.5, 6.0), invalid_geometry);
    CHECK_THROWS_AS(build_periodic(1.0, 0.0, 6.0), invalid_geometry);
    CHECK_THROWS_AS(build_periodic(0.0, 0.5, 6.0), invalid_geometry);
    // center semantics: distances must exceed the diameter
    CHECK_THROWS_AS(build_periodic(1.0, 0.5, 6.0, Separation::center), invalid_geometry);
    CHECK_NOTHROW(build_periodic(1.0, 2.5, 8.0, Separation::center));
}

TEST_CASE("center semantics matches gap semantics shifted by the diameter") {
    auto gg = build_periodic(1.0, 0.5, 6.0, Separation::gap);
    auto gc = build_periodic(1.0, 2.5, 8.0, Separation::center);
    CHECK(gg.period() == Catch::Approx(gc.period()));
    CHECK(gg.center1().x == Catch::Approx(gc.center1().x));
}

TEST_CASE("material defect array") {
    auto g = build_periodic(1.0, 0.5, 6.0);
    auto arr = build_material_defect_array(g, 12);
    REQUIRE(arr.size() == 48);
    CHECK(arr.min_gap() == Catch::Approx(0.5));

    // parity about the array midpoint maps the position multiset to itself
    double lo = arr.centers.front().x, hi = arr.centers.back().x;
    const double mid = 0.5 * (lo + hi);
    CHECK(mid == Catch::Approx(g.period() / 2));
    for (int i = 0; i < arr.size(); ++i) {
        const double mirrored = 2 * mid - arr.centers[i].x;
        CHECK(mirrored == Catch::Approx(arr.centers[arr.size() - 1 - i].x).margin(1e-10));
    }
    // kappa pattern mirrors as well
    for (int i = 0; i < arr.size(); ++i)
        CHECK(arr.slots[i] == arr.slots[arr.size() - 1 - i]);

    auto small = build_material_defect_array(g, 1);
    CHECK(small.size() == 4);
}

TEST_CASE("geometric defect array") {
    auto g = build_periodic(1.0, 0.5, 6.0);
    auto arr = build_geometric_defect_array(g, 12);
    REQUIRE(arr.size() == 49);
    CHECK(arr.warnings.empty());

    auto tiny = build_geometric_defect_array(g, 1);
    REQUIRE(tiny.size() == 5);
    CHECK(tiny.centers[2].x == Catch::Approx(0.0));
    CHECK(tiny.slots[2] == KappaSlot::kappa0);

    // mirror symmetry of positions about the center resonator
    for (int i = 0; i < arr.size(); ++i)
        CHECK(arr.centers[i].x == Catch::Approx(-arr.centers[arr.size() - 1 - i].x).margin(1e-10));

    // center flanked by the wide gap on both sides; pairs separated by gap_in
    std::vector<double> xs;
    for (auto& c : arr.centers) xs.push_back(c.x);
    const int ic = 24;
    CHECK(xs[ic + 1] - xs[ic] - 2.0 == Catch::Approx(6.0));
    CHECK(xs[ic] - xs[ic - 1] - 2.0 == Catch::Approx(6.0));
    CHECK(xs[ic + 2] - xs[ic + 1] - 2.0 == Catch::Approx(0.5));

    // every pairwise gap strictly positive
    CHECK(arr.min_gap() > 0.0);

    auto warned = build_geometric_defect_array(build_periodic(1.0, 6.0, 0.5), 2);
    CHECK_FALSE(warned.warnings.empty());
}
