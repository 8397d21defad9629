#pragma once

#include <stdexcept>
#include <string>

namespace msle {

// Pairing is not a planar pair partition (or indices malformed).
struct NonPlanarError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Kernel or map evaluated at a point where it is singular (coincident
// marked points, pole of the uniformizing map, ...).
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Marked point sits at a corner, where the boundary derivative does not exist.
struct CornerError : std::domain_error {
    using std::domain_error::domain_error;
};

// A lattice trace violated one of its invariants (left the domain,
// revisited a directed edge, ended at a non-marked vertex).
struct TracingError : std::logic_error {
    using std::logic_error::logic_error;
};

// The mesh is too coarse for the request (marks snapping to the same
// boundary vertex, or losing their cyclic order).
struct ResolutionError : std::domain_error {
    using std::domain_error::domain_error;
};

// A numerical routine diverged or failed to converge within its budget.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace msle
