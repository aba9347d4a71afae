#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nhchain/errors.hpp"

namespace nhchain {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Whether gap_in/gap_out denote boundary-to-boundary gaps or center distances.
// The periodic sections of the source problem force the gap reading (with unit
// radius, a center distance of 0.5 would overlap the disks), so gap is the
// default; center is kept as a sensitivity switch.
enum class Separation { gap, center };

// A parity-symmetric dimer unit cell: two equal disks on the x-axis, origin at
// the midpoint between them so that parity is exactly x -> -x.
class ChainGeometry {
public:
    ChainGeometry(double radius, double gap_in, double gap_out,
                  Separation mode = Separation::gap)
        : radius_(radius), gap_in_(gap_in), gap_out_(gap_out), mode_(mode) {
        if (!(radius > 0.0)) throw invalid_geometry("radius must be positive");
        if (!(gap_in > 0.0) || !(gap_out > 0.0))
            throw invalid_geometry("separations must be positive");
        if (mode == Separation::center) {
            if (gap_in <= 2 * radius || gap_out <= 2 * radius)
                throw invalid_geometry("center separations must exceed the disk diameter");
        }
    }

    double radius() const { return radius_; }
    double gap_in() const { return gap_in_; }
    double gap_out() const { return gap_out_; }
    Separation separation_mode() const { return mode_; }

    // Center-to-center distances, whichever convention was supplied.
    double dimer_spacing() const {
        return mode_ == Separation::gap ? gap_in_ + 2 * radius_ : gap_in_;
    }
    double cell_spacing() const {
        return mode_ == Separation::gap ? gap_out_ + 2 * radius_ : gap_out_;
    }

    double period() const { return dimer_spacing() + cell_spacing(); }
    double disk_area() const { return M_PI * radius_ * radius_; }

    // First/second resonator center in the cell; center2 = -center1.
    Vec2 center1() const { return {-dimer_spacing() / 2, 0.0}; }
    Vec2 center2() const { return {+dimer_spacing() / 2, 0.0}; }

    // Same cell with the roles of the two separations exchanged (the
    // half-period-shifted description of the same crystal).
    ChainGeometry swapped() const {
        return ChainGeometry(radius_, gap_out_, gap_in_, mode_);
    }

private:
    double radius_;
    double gap_in_;
    double gap_out_;
    Separation mode_;
};

inline ChainGeometry build_periodic(double radius, double gap_in, double gap_out,
                                    Separation mode = Separation::gap) {
    return ChainGeometry(radius, gap_in, gap_out, mode);
}

enum class DefectKind { material_edge, geometric_center };

// Which bulk modulus a resonator carries. kappa0 is the real center value of
// the geometric-defect chain.
enum class KappaSlot { kappa1, kappa2, kappa0 };

struct FiniteArrayLayout {
    DefectKind kind = DefectKind::material_edge;
    double radius = 1.0;
    std::vector<Vec2> centers;
    std::vector<KappaSlot> slots;
    // material edge: cells per side; geometric: pairs per side (M).
    int half_count = 0;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(centers.size()); }

    double min_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j)
                g = std::min(g, dist(centers[i], centers[j]) - 2 * radius);
        return g;
    }
};

// Periodic chain truncated to cells m = -(cells_per_side-1) .. cells_per_side,
// with the bulk-modulus swap across the edge between cells 0 and 1:
// (kappa1, kappa2) per dimer for m <= 0 and (kappa2, kappa1) for m > 0.
// The resulting structure is parity symmetric about x = L/2.
inline FiniteArrayLayout build_material_defect_array(const ChainGeometry& geom,
                                                     int cells_per_side) {
    if (cells_per_side < 1) throw invalid_geometry("cells_per_side must be >= 1");
    FiniteArrayLayout out;
    out.kind = DefectKind::material_edge;
    out.radius = geom.radius();
    out.half_count = cells_per_side;
    const double L = geom.period();
    for (int m = -(cells_per_side - 1); m <= cells_per_side; ++m) {
        out.centers.push_back({m * L + geom.center1().x, 0.0});
        out.centers.push_back({m * L + geom.center2().x, 0.0});
        if (m <= 0) {
            out.slots.push_back(KappaSlot::kappa1);
            out.slots.push_back(KappaSlot::kappa2);
        } else {
            out.slots.push_back(KappaSlot::kappa2);
            out.slots.push_back(KappaSlot::kappa1);
        }
    }
    return out;
}

// Dimerized chain with a single center resonator: N = 4M+1 disks. The center
// disk sits at the origin with the wide separation on both sides; each flanking
// pair is read (kappa1, kappa2) left to right, and the center carries kappa0.
// Mirror symmetry about the center maps slot kappa1 <-> kappa2, which together
// with conjugate moduli makes the structure PT symmetric.
inline FiniteArrayLayout build_geometric_defect_array(const ChainGeometry& geom, int M) {
    if (M < 1) throw invalid_geometry("M must be >= 1");
    FiniteArrayLayout out;
    out.kind = DefectKind::geometric_center;
    out.radius = geom.radius();
    out.half_count = M;
    if (geom.gap_in() >= geom.gap_out())
        out.warnings.push_back("geometric defect assumes gap_in < gap_out");
    const double P = geom.period();
    const double dc = geom.dimer_spacing();
    for (int k = M; k >= 1; --k) {
        out.centers.push_back({-k * P, 0.0});
        out.centers.push_back({-k * P + dc, 0.0});
        out.slots.push_back(KappaSlot::kappa1);
        out.slots.push_back(KappaSlot::kappa2);
    }
    out.centers.push_back({0.0, 0.0});
    out.slots.push_back(KappaSlot::kappa0);
    for (int k = 1; k <= M; ++k) {
        out.centers.push_back({k * P - dc, 0.0});
        out.centers.push_back({k * P, 0.0});
        out.slots.push_back(KappaSlot::kappa1);
        out.slots.push_back(KappaSlot::kappa2);
    }
    return out;
}

} // namespace nhchain
