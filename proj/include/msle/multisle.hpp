#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msle/combinatorics.hpp"
#include "msle/conformal.hpp"
#include "msle/lattice.hpp"
#include "msle/loewner.hpp"
#include "msle/partition.hpp"
#include "msle/stats.hpp"

namespace msle {

// N disjoint chords in a reference domain: curve i runs between the marked
// boundary points named by pattern.links[i] (1-based indices into
// domain.marked) and is oriented from the first leg to the second. Curves
// are stored in domain coordinates.
struct MultiCurveState {
    Parameters params;
    LinkPattern pattern;
    DomainSpec domain;          // half_plane or rectangle
    std::vector<Curve> curves;  // one polyline per link of pattern
};

// Assembles a state and enforces its invariants: marks sit on the domain
// boundary in increasing boundary order (rectangle marks must stay short of
// the top-edge midpoint, which has no finite half-plane image), every curve
// starts and ends on its marks (endpoints are snapped exactly) and stays in
// the closed domain, and for kappa <= 4 no curve strictly crosses itself or
// another. Touching without a transversal crossing is allowed, since lattice
// interfaces may share medial vertices. Violations throw
// std::invalid_argument.
MultiCurveState make_state(const Parameters& params, const LinkPattern& pattern,
                           const DomainSpec& domain, std::vector<Curve> curves);

// State read off traced lattice interfaces: the domain is the continuum
// rectangle of the polygon, the marks are the path endpoints, and the link
// pattern is classified from the paths. Works for Ising walls and FK
// interfaces alike.
MultiCurveState state_from_paths(const Parameters& params,
                                 const DiscretePolygon& p,
                                 const std::vector<MedialPath>& paths);

// Shoelace area of the loop formed by the polyline and its closing chord.
// The sign follows the loop orientation, so a curve arching above a
// left-to-right chord comes out negative.
double signed_area(const Curve& curve);

// sum of the curves' signed areas, the scalar fingerprint used by the chain
// diagnostics below
double state_statistic(const MultiCurveState& state);

// deterministic sine arch from a to b, bowing toward the left normal of the
// chord; building block for initial chain states
Curve arc_curve(cplx a, cplx b, double height, int n_points);

// true when a segment of one polyline strictly crosses a segment of the
// other; shared endpoints and tangential touches do not count
bool curves_cross(const Curve& a, const Curve& b);

// One sweep of the conditional law: curve j (0-based index into curves) is
// replaced by a chordal SLE_kappa sample of the connected component of the
// domain minus the other curves that contains curve j's endpoints. The
// component is mapped to the half-plane by unzipping the neighbours one at a
// time (driving-function extraction plus forward slit flow, preceded by a
// Moebius flip whenever the targets lie under the arch being unzipped), the
// new curve is sampled there and pulled back through the inverse flow.
// Neighbours cut off from the target component are dropped from the
// construction but returned bitwise unchanged, like every other curve.
//
// Only kappa <= 4 is resampled. When an unzipping step swallows a target
// endpoint the component construction has failed and a SingularityError is
// thrown; a pulled-back sample that crosses a kept curve is retried with a
// derived seed up to a small budget before giving up with a NumericsError.
MultiCurveState resample_step(const MultiCurveState& state, int j,
                              std::uint64_t seed);

struct ChainOptions {
    int stride = 1;   // record every stride-th step
    int burn_in = 0;  // steps before the first recorded state
};

// Resampling Markov chain: each step redraws a uniformly random curve index.
// Returns the recorded trajectory, the states after steps burn_in,
// burn_in + stride, ...; step 0 is the initial state, so with the default
// options the initial state is included and zero steps return it unchanged.
// Deterministic given the seed.
std::vector<MultiCurveState> run_resampling_chain(const MultiCurveState& initial,
                                                  int steps, std::uint64_t seed,
                                                  const ChainOptions& options = {});

// kappa * d/dx_j log Z_alpha (j is 1-based) by central finite differences.
// The step is 1e-4 of the smallest gap between x_j and the other points,
// clamped below at 1e-10. A provider that is not positive at a probed
// configuration throws std::domain_error.
double partition_drift(const PartitionProvider& provider, const BoundaryConfig& x,
                       const LinkPattern& alpha, int j, double kappa);

// Euler-Maruyama chain for the curve growing from x_j toward its partner
// under alpha: the driver drifts by kappa * d_j log Z_alpha while every
// other marked point follows dV = 2 dt / (V - W). dt caps the step; near any
// marked point the step shrinks with the square of the gap so the approach
// is resolved. Stops when the mapped gap to the partner collapses (the
// swallowing time) and returns the traced curve, which ends near the partner
// but is not closed onto it. A spectator point colliding with the driver
// first means the step size is too coarse and throws NumericsError.
Curve sample_drifted_chain(const Parameters& params, const BoundaryConfig& x,
                           const LinkPattern& alpha, int j,
                           const PartitionProvider& provider, double dt,
                           std::uint64_t seed);

// Cascade diagnostic on stationary samples sharing a pattern with the link
// {j, j+1}: conditionally on that curve, the remaining ones should form the
// smaller ensemble of the slit component. The first half of the samples
// contributes the conditional signed-area statistic directly; in the second
// half the complementary curves are redrawn by direct conditional sampling.
// The two ensembles are compared by a two-sample test at the 1% level.
struct CascadeReport {
    bool vacuous = false;  // single-curve input, nothing to compare
    std::size_t n_conditional = 0;
    std::size_t n_direct = 0;
    KsResult area_test;
    bool pass = false;
};

CascadeReport cascade_check(const std::vector<MultiCurveState>& samples, int j,
                            std::uint64_t seed);

// the integer threshold ceil(kappa / (8 - kappa)) + 1 of the non-simple
// regime; kappa outside (4, 8) throws std::invalid_argument
int n_kappa(double kappa);

// Trajectory persistence: one curve file per recorded state and curve index
// (curve-<state>-<index>.txt under dir) plus manifest.json carrying the
// seed, kappa, pattern, stride, domain and marks.
void write_trajectory(const std::string& dir,
                      const std::vector<MultiCurveState>& trajectory,
                      std::uint64_t seed, int stride);

struct TrajectoryFile {
    std::vector<MultiCurveState> states;
    std::uint64_t seed = 0;
    int stride = 1;
};

TrajectoryFile read_trajectory(const std::string& dir);

} // namespace msle
