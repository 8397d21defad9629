#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "msle/conformal.hpp"

namespace msle {

// polyline in the closed upper half-plane
using Curve = std::vector<cplx>;

// sampled driving function: W(times[j]) = values[j], times[0] = 0
struct DrivingFunction {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
    double capacity() const { return times.empty() ? 0.0 : times.back(); }
};

// |g_s(z) - W_s| below this declares the point swallowed
constexpr double kSwallowTol = 1e-9;

// branch of sqrt with values in the closed upper half-plane
cplx upper_sqrt(cplx v);

// map removing the vertical slit [xi, xi + 2i*sqrt(dt)] from H, normalized
// hydrodynamically; continuous across the slit base, boundary stays on R
cplx slit_forward(cplx z, double xi, double dt);

// inverse of slit_forward (welds [xi - 2*sqrt(dt), xi + 2*sqrt(dt)] into a slit)
cplx slit_inverse(cplx u, double xi, double dt);

struct SolveResult {
    bool swallowed = false;
    std::size_t step = 0;  // steps applied before the verdict
    double time = 0.0;     // capacity at the verdict
    cplx value;            // g_T(z), or the last image before swallowing
};

// evolve z through the full driver by composing per-step slit maps
SolveResult solve_forward(const DrivingFunction& driver, cplx z,
                          double tol = kSwallowTol);

// Brownian driver with variance kappa*dt per step; steps are uniform with
// width <= dt chosen so the total capacity is hit exactly
DrivingFunction sample_driver(const Parameters& params, double capacity,
                              double dt, std::uint64_t seed);

// curve traced by the driver, via backward composition of inverse slit maps
Curve curve_from_driver(const DrivingFunction& driver);

// chordal SLE_kappa curve from 0 with half-plane capacity T
Curve sample_chordal_sle(const Parameters& params, double capacity, double dt,
                         std::uint64_t seed);

// chordal SLE_kappa from xa aimed at xb, by the one-force-point drifted chain
//   dW = (6-kappa)/(V-W) dt + sqrt(kappa) dB,   dV = 2 dt / (V-W),
// with step size min(dt_cap, 0.005*gap^2) while the mapped gap stays within
// four times |xb-xa|, and scale-invariant 0.005*gap^2 on far excursions; the
// force point is advanced by the per-step slit map so it tracks the discrete
// hull exactly.  Evolution stops once the tip is within stop_rel*|xb-xa| of
// xb in the plane; the returned polyline is always closed onto the terminal
// point xb.
//
// Terminal accuracy is resolution limited.  When the sampled curve overhangs
// xb, the harmonic measure underneath decays below what double precision can
// resolve in V-W, the mapped gap drains before the tip physically arrives,
// and the trajectory is closed onto xb from wherever it stalled.  Typical
// landings sit at stop_rel; stalls (roughly one run in eight at kappa = 8/3)
// can close from a distance comparable to |xb-xa|.
Curve sample_chordal_sle_between(const Parameters& params, double xa, double xb,
                                 double dt_cap, double stop_rel,
                                 std::uint64_t seed);

// zipper: unzip the curve slit by slit and report the driving function.  The
// polyline is thinned by index to at most n_steps segments; points whose
// unzipped image has height below an internal floor contribute no capacity
// and are skipped.
DrivingFunction extract_driver(const Curve& curve, std::size_t n_steps);

// derivative of the hull map at a real point that survives the evolution;
// product of per-step slit-map derivatives, always in (0,1]
double hull_derivative(const DrivingFunction& driver, double x);

// discrete Frechet distance between the two polylines
double curve_distance(const Curve& c1, const Curve& c2);

// sum of squared driver increments
double quadratic_variation(const DrivingFunction& driver);

struct CurveFile {
    Curve points;
    double capacity = 0.0;
    double kappa = 0.0;
    std::uint64_t seed = 0;
};

struct DriverFile {
    DrivingFunction driver;
    double kappa = 0.0;
    std::uint64_t seed = 0;
};

// plain-text formats with header "# capacity=<T> kappa=<k> seed=<s>";
// curve files hold "re im" per line, driver files "t W"
void write_curve(const std::string& path, const Curve& curve, double capacity,
                 double kappa, std::uint64_t seed);
CurveFile read_curve(const std::string& path);
void write_driver(const std::string& path, const DrivingFunction& driver,
                  double kappa, std::uint64_t seed);
DriverFile read_driver(const std::string& path);

}  // namespace msle
