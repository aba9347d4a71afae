#pragma once

#include <stdexcept>
#include <string>

namespace nhchain {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry that cannot be built (non-positive lengths, overlapping disks).
class invalid_geometry : public error {
public:
    using error::error;
};

// Quasi-static evaluation requested at alpha = 0, where the single layer
// potential is not invertible. Callers must use the extrapolation path.
class singular_quasiperiodicity : public error {
public:
    using error::error;
};

// Evaluation of two coincident points in a singular kernel.
class singular_evaluation : public error {
public:
    using error::error;
};

// A numerical result missed its accuracy target. Carries the achieved residual.
class accuracy_error : public error {
public:
    accuracy_error(const std::string& what, double residual)
        : error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Linear system assembly/solve failure.
class assembly_error : public error {
public:
    using error::error;
};

// Band gap closes on the sampling grid; winding/Zak quantities undefined.
class degenerate_band : public error {
public:
    using error::error;
};

// Exceptional point: eigenvectors coalesce, biorthogonal system undefined.
class exceptional_point : public error {
public:
    using error::error;
};

// |C12| = 0: the explicit gauge e^{-i phi} = .../conj(C12) breaks down.
class gauge_undefined : public error {
public:
    using error::error;
};

// Wilson-loop overlap too close to zero for a meaningful log.
class ill_conditioned_loop : public error {
public:
    using error::error;
};

// Neither mu branch is flat: no localized-mode candidate at this b.
class no_flat_band : public error {
public:
    using error::error;
};

// Both decay roots inside the unit disk; contradicts the root trichotomy.
class inconsistent_roots : public error {
public:
    using error::error;
};

// Winding number requested about a point the curve passes through.
class singular_winding : public error {
public:
    using error::error;
};

// Singular B matrix in the defect reduction.
class singular_matrix : public error {
public:
    using error::error;
};

// Search bracket did not contain a sign change.
class not_found : public error {
public:
    using error::error;
};

// Configuration file problems, with line/key context where known.
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
    config_error(const std::string& what, int line)
        : error("line " + std::to_string(line) + ": " + what) {}
};

} // namespace nhchain
