#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msle/lattice.hpp"
#include "msle/random.hpp"

namespace msle {

// Boundary wiring of a bond configuration. With `alternating` the marks
// split the rim into 2N arcs and every second arc, starting with the arc
// from the first mark to the second, is a wired block; the complementary
// arcs are free. Each mark belongs to the arc on its clockwise side, so a
// wired arc owns its counterclockwise endpoint but not the vertex it
// starts from. Edges joining two vertices of the same wired block are
// frozen open; every other edge, rim or interior, is a random bond.
enum class Wiring { alternating, free_all, wired_all };

// Random-cluster bond configuration on the edges of a grid polygon.
struct BondConfig {
    DiscretePolygon polygon;
    std::vector<std::uint8_t> omega; // per edge id, 1 = open
    double q = 1.0;
    double p = 0.5;
    Wiring wiring = Wiring::free_all;
    // When set, `omega` holds the dual occupation 1 - omega(e), indexed by
    // the primal edge each dual edge crosses, and the wired and free arcs
    // exchange roles. The wiring tag always describes the primal layer.
    bool dual = false;

    std::vector<int> wired_class;           // per vertex, -1 when free
    std::vector<std::vector<int>> wired_members; // vertices of each block
    std::vector<std::uint8_t> frozen;       // per edge, status is permanent

    bool open(int e) const { return omega[static_cast<std::size_t>(e)] != 0; }
};

// self-dual point sqrt(q) / (1 + sqrt(q)), critical for q >= 1
double fk_p_critical(double q);

// diffusivity of the conjectured interface scaling limit,
// 4 pi / arccos(-sqrt(q)/2); 6 at q = 1, 16/3 at q = 2, down to 4 at q = 4
double fk_interface_kappa(double q);

// Constructors for the three wirings. Cluster weight q must lie in [1,4);
// a negative bond_p requests the self-dual point. All random bonds start
// closed. The free wiring ignores the marks entirely.
BondConfig fk_config_alternating(const DiscretePolygon& p, double q,
                                 double bond_p = -1.0);
BondConfig fk_config_free(const DiscretePolygon& p, double q,
                          double bond_p = -1.0);
BondConfig fk_config_wired(const DiscretePolygon& p, double q,
                           double bond_p = -1.0);

// Connectivity through open bonds in the wired quotient: stepping onto any
// vertex of a wired block reaches the whole block. Edge `skip_edge` is
// treated as closed, which is the query the single-bond dynamics needs.
bool fk_connected(const BondConfig& cfg, int u, int v, int skip_edge = -1);

// Single-bond heat bath: one pass per sweep over the random edges in id
// order, opening each with probability p when its endpoints are connected
// elsewhere and p / (p + q(1-p)) when they are not.
void fk_heat_bath(BondConfig& cfg, int sweeps, Rng& rng);

// Samples the critical model with alternating wiring from an all-closed
// start. Deterministic given the seed.
BondConfig sample_critical_fk(const DiscretePolygon& p, double q, int sweeps,
                              std::uint64_t seed);

// Cluster moves for q = 2 only (throws otherwise): colour the wired-quotient
// clusters of the current bonds with independent signs, then redraw every
// random bond, open with probability p across equal signs and closed across
// unequal ones. Much faster mixing than the single-bond dynamics.
void fk_swendsen_wang(BondConfig& cfg, int moves, Rng& rng);

// Loop representation of a primal configuration. Strands live on the
// diamond sides of every cell plus one outer segment around each free rim
// vertex, and at the midpoint of edge e they bounce off e when it is open
// and off its dual edge when it is closed. With alternating wiring that
// routing has exactly one loose end at each marked medial vertex, so the
// strands decompose into closed loops plus N boundary-to-boundary
// interfaces pairing up the marks. Every strand segment is used exactly
// once; `n_medial_edges` records how many there are. Loops are reported as
// the cyclic sequence of midpoints (primal edge ids) they visit.
struct FkTrace {
    std::vector<MedialPath> interfaces;
    std::vector<std::vector<int>> loops;
    std::size_t n_medial_edges = 0;
};

FkTrace trace_fk_interfaces(const BondConfig& cfg);

// Dual configuration on the same edge index set: omega*(e) = 1 - omega(e),
// q unchanged, and p mapped through p q(1-p) / (p + q(1-p)) so that the
// dual of the dual restores the original. Wired arcs become free and vice
// versa, recorded by the `dual` flag.
BondConfig dual_config(const BondConfig& cfg);

// Plain-text dump (polygon spec, parameters, wiring tag, one occupation bit
// per edge) and its inverse, for regression fixtures and the command line.
std::string bonds_to_text(const BondConfig& cfg);
BondConfig bonds_from_text(const std::string& text);

} // namespace msle
