#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msle/combinatorics.hpp"

namespace msle {

// Strictly increasing marked boundary points x_1 < ... < x_{2N} on the real
// line. Construction validates the ordering (pairwise gaps above 1e-12).
class BoundaryConfig {
  public:
    explicit BoundaryConfig(std::vector<double> points);

    const std::vector<double>& points() const { return points_; }
    int n_curves() const { return static_cast<int>(points_.size()) / 2; }
    // 1-based access matching the usual x_1 ... x_{2N} indexing
    double at(int i) const { return points_[static_cast<std::size_t>(i - 1)]; }

  private:
    std::vector<double> points_;
};

// m!! for odd m, exact integer arithmetic; m = -1 and m = 1 give 1
std::uint64_t double_factorial_odd(int m);

// prod_{i<j} (x_j - x_i)^{2h(-1)^{j-i}}, accumulated in log space
double alternating_product(const BoundaryConfig& x, double h);

// sum over planar link patterns of prod_links (x_b - x_a)^{-2h}, via
// log-sum-exp; N at most 8
double nearest_pair_sum(const BoundaryConfig& x, double h);

// the deterministic bound: nearest_pair_sum <= (2N-1)!! * alternating_product
struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};
BoundReport check_total_bound(const BoundaryConfig& x, double h);

// (x4-x1)(x3-x2) / ((x3-x1)(x4-x2)) for x1<x2<x3<x4; always in [0,1]
double cross_ratio(double x1, double x2, double x3, double x4);

// prod_{i != k,k+1} |(x_i-x_k)/(x_i-x_{k+1})|^{2h(-1)^{i+k+1}} for
// 1 <= k <= 2N-1; factors into cross-ratios, hence at most 1
double collapse_products(const BoundaryConfig& x, double h, int k);

// one-curve partition function (x_2 - x_1)^{-2h}
double z_alpha_closed_n1(const BoundaryConfig& x, double h);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

// Monte Carlo estimate at kappa = 8/3 of the probability that N independently
// sampled chordal curves joining the points paired by alpha stay pairwise
// disjoint. Disjointness is decided at polyline resolution with a guard tube
// whose radius is the coarser curve's median edge length, so the estimate is
// resolution-dependent (biased toward collision). N up to 4.
McEstimate f_alpha_mc_83(const BoundaryConfig& x, const LinkPattern& alpha,
                         std::size_t samples, std::uint64_t seed);

// evaluator (config, pattern) -> positive weight, tagged by provenance
struct PartitionProvider {
    std::string label;
    std::function<double(const BoundaryConfig&, const LinkPattern&)> eval;

    double operator()(const BoundaryConfig& x, const LinkPattern& alpha) const;
};

// exact one-curve provider, label "closed-form-N1"
PartitionProvider closed_form_n1_provider(double h);
// kappa = 8/3 provider: f-hat times the product of link gaps to -2h, with
// h = 5/8; zero-hit estimates are floored at half a sample to keep the
// weight positive; label "monte-carlo-8/3"
PartitionProvider mc_83_provider(std::size_t samples, std::uint64_t seed);
// wraps a user-supplied evaluator, label "external"
PartitionProvider external_provider(
    std::function<double(const BoundaryConfig&, const LinkPattern&)> fn);

// total weight: sum of the provider over all patterns of the config's size
double total_partition(const PartitionProvider& provider, const BoundaryConfig& x);

// partial sum over the patterns whose link through 2N lands on 2j+1,
// 0 <= j <= N-1; the C_j sum over j recovers total_partition exactly
double c_j_decomposition(const PartitionProvider& provider,
                         const BoundaryConfig& x, int j);

// Collapse diagnostic: 2k points at xi + eps * (1..2k) are prepended to
// x_tail and the ratio total^{(N)} / total^{(k)} is tabulated per eps. The
// trend toward total^{(N-k)}(x_tail) is reported, never asserted.
struct RatioRow {
    double eps = 0.0;
    double ratio = 0.0;
};
std::vector<RatioRow> asymptotic_ratio_probe(const PartitionProvider& provider,
                                             const std::vector<double>& x_tail,
                                             int k,
                                             const std::vector<double>& eps_list);

// Z_alpha estimate in the rectangle [0,ell]x[0,height] with the marked points
// on the bottom edge: conformally invariant f-hat (marks pushed to the real
// line through the rectangle map) times the product of rectangle kernels to
// the power h = 5/8
McEstimate z_alpha_rect_mc_83(double ell, double height,
                              const std::vector<double>& marks,
                              const LinkPattern& alpha, std::size_t samples,
                              std::uint64_t seed);

// one row of the deterministic verification suite
struct VerifyRow {
    std::string op;
    int n = 0;
    double kappa = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double std_error = 0.0;
};

// randomized inequality sweep at a single (N, kappa): total bound and
// collapse products over `trials` random configurations
std::vector<VerifyRow> run_verification_suite(int n, double kappa,
                                              std::size_t trials,
                                              std::uint64_t seed);

} // namespace msle
