#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "msle/combinatorics.hpp"
#include "msle/lattice.hpp"
#include "msle/random.hpp"

namespace msle {

// Ising spins on the vertices of a marked grid polygon. The boundary is
// frozen to the alternating pattern: walking the cycle counterclockwise,
// arcs from odd to even marks (1-based) carry +1 and the complementary arcs
// carry -1, each mark taking the sign of the arc that ends at it. So the
// even marks x_2, x_4, ... sit at the counterclockwise end of a plus arc.
struct SpinConfig {
    DiscretePolygon polygon;
    std::vector<std::int8_t> spins;          // per vertex id, -1 or +1
    std::vector<std::int8_t> boundary_fixed; // per vertex id, 0 where free

    int spin(int i, int j) const { return spins[polygon.vertex_id(i, j)]; }
};

inline double ising_beta_critical() { return 0.5 * std::log(1.0 + std::sqrt(2.0)); }

// the frozen alternating assignment: signs on the boundary, 0 inside
std::vector<std::int8_t> alternating_boundary_spins(const DiscretePolygon& p);

// Heat-bath sweeps at the critical coupling over the free vertices of cfg
// (raster order, one pass per sweep). Entries with boundary_fixed != 0 never
// change; free vertices must be interior so the four-neighbour field exists.
void heat_bath_sweeps(SpinConfig& cfg, int sweeps, Rng& rng);

// Samples the critical Ising model with alternating boundary conditions:
// free spins start uniformly at random, then `sweeps` heat-bath passes.
// Deterministic given the seed.
SpinConfig sample_critical_ising(const DiscretePolygon& p, int sweeps,
                                 std::uint64_t seed);

// conservative burn-in default, 10 sweeps per lattice site
int ising_default_sweeps(const DiscretePolygon& p);

// Interfaces of an alternating-boundary configuration. Each wall keeps +1
// on its left and -1 on its right, and turns left whenever both turns are
// admissible (the checkerboard cell). With the standard arc signs the N
// walls start at the even marks x_2, x_4, ...; with globally flipped spins
// they start at the odd marks instead, which this routine detects from the
// boundary. Throws TracingError when a wall revisits a crossing, leaves the
// domain away from a mark, or the boundary does not alternate.
std::vector<MedialPath> trace_interfaces(const SpinConfig& cfg);

// Plain-text dump of a configuration (polygon spec plus one sign row per
// vertex row) and its inverse, for regression fixtures. The free/frozen
// split is not stored: on load the rim is frozen at the stored signs.
std::string spins_to_text(const SpinConfig& cfg);
SpinConfig spins_from_text(const std::string& text);

} // namespace msle
