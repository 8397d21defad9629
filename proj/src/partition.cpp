#include "msle/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msle/conformal.hpp"
#include "msle/errors.hpp"
#include "msle/geometry.hpp"
#include "msle/loewner.hpp"
#include "msle/random.hpp"
#include "msle/stats.hpp"

namespace msle {

namespace {

constexpr double kMinGap = 1e-12;

double log_sum_exp(const std::vector<double>& logs) {
    double m = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

// median edge length of a polyline, the resolution scale of the sampler
double median_edge(const Curve& c) {
    std::vector<double> lens;
    lens.reserve(c.size());
    for (std::size_t i = 1; i < c.size(); ++i) {
        double l = std::abs(c[i] - c[i - 1]);
        if (l > 0.0) lens.push_back(l);
    }
    if (lens.empty()) return 0.0;
    std::size_t mid = lens.size() / 2;
    std::nth_element(lens.begin(), lens.begin() + mid, lens.end());
    return lens[mid];
}

} // namespace

BoundaryConfig::BoundaryConfig(std::vector<double> points)
    : points_(std::move(points)) {
    if (points_.size() < 2 || points_.size() % 2 != 0)
        throw std::invalid_argument("BoundaryConfig: need 2N points");
    for (double p : points_)
        if (!std::isfinite(p))
            throw std::invalid_argument("BoundaryConfig: non-finite point");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (points_[i] - points_[i - 1] <= kMinGap)
            throw std::invalid_argument("BoundaryConfig: points must increase strictly");
}

std::uint64_t double_factorial_odd(int m) {
    if (m < -1 || m % 2 == 0)
        throw std::invalid_argument("double_factorial_odd: m must be odd");
    if (m > 19)
        throw std::out_of_range("double_factorial_odd: overflow guard at 19!!");
    std::uint64_t r = 1;
    for (int v = m; v >= 3; v -= 2) r *= static_cast<std::uint64_t>(v);
    return r;
}

double alternating_product(const BoundaryConfig& x, double h) {
    const std::vector<double>& p = x.points();
    int m = static_cast<int>(p.size());
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
            acc += 2.0 * h * sign * std::log(p[j] - p[i]);
        }
    return std::exp(acc);
}

double nearest_pair_sum(const BoundaryConfig& x, double h) {
    int n = x.n_curves();
    if (n > 8)
        throw std::out_of_range("nearest_pair_sum: N above 8");
    std::vector<double> logs;
    for (const LinkPattern& alpha : enumerate_patterns(n)) {
        double s = 0.0;
        for (const auto& [a, b] : alpha.links)
            s -= 2.0 * h * std::log(x.at(b) - x.at(a));
        logs.push_back(s);
    }
    return std::exp(log_sum_exp(logs));
}

BoundReport check_total_bound(const BoundaryConfig& x, double h) {
    if (h < 0.0)
        throw std::invalid_argument("check_total_bound: h must be nonnegative");
    BoundReport r;
    r.lhs = nearest_pair_sum(x, h);
    r.rhs = static_cast<double>(double_factorial_odd(2 * x.n_curves() - 1)) *
            alternating_product(x, h);
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
    return r;
}

double cross_ratio(double x1, double x2, double x3, double x4) {
    if (!(x1 < x2 && x2 < x3 && x3 < x4))
        throw std::invalid_argument("cross_ratio: need x1<x2<x3<x4");
    return (x4 - x1) * (x3 - x2) / ((x3 - x1) * (x4 - x2));
}

double collapse_products(const BoundaryConfig& x, double h, int k) {
    int m = static_cast<int>(x.points().size());
    if (k < 1 || k > m - 1)
        throw std::out_of_range("collapse_products: k outside 1..2N-1");
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
        if (i == k || i == k + 1) continue;
        double sign = ((i + k + 1) % 2 == 0) ? 1.0 : -1.0;
        acc += 2.0 * h * sign *
               (std::log(std::abs(x.at(i) - x.at(k))) -
                std::log(std::abs(x.at(i) - x.at(k + 1))));
    }
    return std::exp(acc);
}

double z_alpha_closed_n1(const BoundaryConfig& x, double h) {
    if (x.n_curves() != 1)
        throw std::invalid_argument("z_alpha_closed_n1: config must have N=1");
    return std::pow(x.at(2) - x.at(1), -2.0 * h);
}

McEstimate f_alpha_mc_83(const BoundaryConfig& x, const LinkPattern& alpha,
                         std::size_t samples, std::uint64_t seed) {
    int n = x.n_curves();
    if (alpha.n_links() != n)
        throw std::invalid_argument("f_alpha_mc_83: pattern size mismatch");
    if (n > 4)
        throw std::out_of_range("f_alpha_mc_83: N above 4");
    if (samples == 0)
        throw std::invalid_argument("f_alpha_mc_83: need at least one sample");
    if (n == 1) return {1.0, 0.0, samples};

    Parameters params = make_parameters(8.0 / 3.0);
    std::size_t hits = 0;
    std::vector<Curve> curves(static_cast<std::size_t>(n));
    std::vector<double> scale(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < samples; ++s) {
        for (int m = 0; m < n; ++m) {
            auto [a, b] = alpha.links[static_cast<std::size_t>(m)];
            double xa = x.at(a), xb = x.at(b);
            double dt_cap = 2e-3 * (xb - xa) * (xb - xa);
            curves[static_cast<std::size_t>(m)] = sample_chordal_sle_between(
                params, xa, xb, dt_cap, 0.02,
                mix_seed(seed, s * 8 + static_cast<std::size_t>(m)));
            scale[static_cast<std::size_t>(m)] =
                median_edge(curves[static_cast<std::size_t>(m)]);
        }
        bool disjoint = true;
        for (int i = 0; i < n && disjoint; ++i)
            for (int j = i + 1; j < n && disjoint; ++j) {
                double tube = std::max(scale[static_cast<std::size_t>(i)],
                                       scale[static_cast<std::size_t>(j)]);
                if (polyline_distance(curves[static_cast<std::size_t>(i)],
                                      curves[static_cast<std::size_t>(j)],
                                      tube) < tube)
                    disjoint = false;
            }
        if (disjoint) ++hits;
    }
    double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, binomial_stderr(p, samples), samples};
}

double PartitionProvider::operator()(const BoundaryConfig& x,
                                     const LinkPattern& alpha) const {
    double v = eval(x, alpha);
    if (!(v > 0.0) || !std::isfinite(v))
        throw NumericsError("PartitionProvider[" + label +
                            "]: weight must be positive");
    return v;
}

PartitionProvider closed_form_n1_provider(double h) {
    return {"closed-form-N1",
            [h](const BoundaryConfig& x, const LinkPattern& alpha) {
                if (alpha.n_links() != 1)
                    throw std::invalid_argument(
                        "closed-form-N1 provider: one-curve patterns only");
                return z_alpha_closed_n1(x, h);
            }};
}

PartitionProvider mc_83_provider(std::size_t samples, std::uint64_t seed) {
    double h = make_parameters(8.0 / 3.0).h;
    return {"monte-carlo-8/3",
            [samples, seed, h](const BoundaryConfig& x, const LinkPattern& alpha) {
                // stream split on the pattern text so each alpha reuses its
                // own reproducible sample set
                std::uint64_t salt = 1469598103934665603ull;
                for (char ch : to_string(alpha)) {
                    salt ^= static_cast<unsigned char>(ch);
                    salt *= 1099511628211ull;
                }
                McEstimate f = f_alpha_mc_83(x, alpha, samples,
                                             mix_seed(seed, salt));
                double fv = std::max(f.value,
                                     0.5 / static_cast<double>(samples));
                double lg = std::log(fv);
                for (const auto& [a, b] : alpha.links)
                    lg -= 2.0 * h * std::log(x.at(b) - x.at(a));
                return std::exp(lg);
            }};
}

PartitionProvider external_provider(
    std::function<double(const BoundaryConfig&, const LinkPattern&)> fn) {
    return {"external", std::move(fn)};
}

double total_partition(const PartitionProvider& provider,
                       const BoundaryConfig& x) {
    double s = 0.0;
    for (const LinkPattern& alpha : enumerate_patterns(x.n_curves()))
        s += provider(x, alpha);
    return s;
}

double c_j_decomposition(const PartitionProvider& provider,
                         const BoundaryConfig& x, int j) {
    int n = x.n_curves();
    if (j < 0 || j >= n)
        throw std::out_of_range("c_j_decomposition: j outside 0..N-1");
    double s = 0.0;
    for (const LinkPattern& alpha : enumerate_patterns(n))
        if (alpha.contains(2 * j + 1, 2 * n)) s += provider(x, alpha);
    return s;
}

std::vector<RatioRow> asymptotic_ratio_probe(const PartitionProvider& provider,
                                             const std::vector<double>& x_tail,
                                             int k,
                                             const std::vector<double>& eps_list) {
    if (k < 1)
        throw std::invalid_argument("asymptotic_ratio_probe: k must be positive");
    if (x_tail.size() % 2 != 0)
        throw std::invalid_argument("asymptotic_ratio_probe: tail needs 2(N-k) points");
    if (eps_list.empty())
        throw std::invalid_argument("asymptotic_ratio_probe: no scales given");
    double eps_max = *std::max_element(eps_list.begin(), eps_list.end());
    double tail_lo = x_tail.empty() ? 0.0 : x_tail.front();
    // anchor the collapsing cluster one unit left of the tail at every scale
    double xi = tail_lo - 1.0 - eps_max * (2.0 * k + 1.0);

    std::vector<RatioRow> out;
    for (double eps : eps_list) {
        std::vector<double> head;
        for (int i = 1; i <= 2 * k; ++i) head.push_back(xi + eps * i);
        std::vector<double> full = head;
        full.insert(full.end(), x_tail.begin(), x_tail.end());
        double num = total_partition(provider, BoundaryConfig(full));
        double den = total_partition(provider, BoundaryConfig(head));
        out.push_back({eps, num / den});
    }
    return out;
}

McEstimate z_alpha_rect_mc_83(double ell, double height,
                              const std::vector<double>& marks,
                              const LinkPattern& alpha, std::size_t samples,
                              std::uint64_t seed) {
    if (!(ell > 0.0) || !(height > 0.0))
        throw std::invalid_argument("z_alpha_rect_mc_83: degenerate rectangle");
    for (double m : marks)
        if (!(m > 0.0) || !(m < ell))
            throw std::invalid_argument("z_alpha_rect_mc_83: marks must lie inside the bottom edge");

    // conformal invariance: estimate f on the real line with the marks
    // pushed through the rectangle map (unit-height normalization first)
    RectMap rm(ell / height);
    std::vector<double> mapped;
    for (double m : marks)
        mapped.push_back(rm.map(cplx(m / height, 0.0)).real());
    McEstimate f = f_alpha_mc_83(BoundaryConfig(mapped), alpha, samples, seed);

    double h = make_parameters(8.0 / 3.0).h;
    double lg = std::log(std::max(f.value, 0.5 / static_cast<double>(samples)));
    for (const auto& [a, b] : alpha.links)
        lg += h * std::log(rect_kernel_bottom(
                  ell, height, marks[static_cast<std::size_t>(a - 1)],
                  marks[static_cast<std::size_t>(b - 1)]));
    double z = std::exp(lg);
    double rel = f.value > 0.0 ? f.std_error / f.value : 0.0;
    return {z, z * rel, samples};
}

std::vector<VerifyRow> run_verification_suite(int n, double kappa,
                                              std::size_t trials,
                                              std::uint64_t seed) {
    if (n < 1 || n > 8)
        throw std::out_of_range("run_verification_suite: N outside 1..8");
    if (trials == 0)
        throw std::invalid_argument("run_verification_suite: need trials");
    double h = make_parameters(kappa).h;
    Rng rng(seed);

    double worst_bound = 0.0, worst_collapse = 0.0;
    bool bound_ok = true, collapse_ok = true;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> pts(static_cast<std::size_t>(2 * n));
        double cur = 10.0 * rng.uniform();
        for (auto& p : pts) {
            cur += 0.05 + 0.95 * rng.uniform();
            p = cur;
        }
        BoundaryConfig x(pts);
        BoundReport r = check_total_bound(x, h);
        worst_bound = std::max(worst_bound, r.lhs / r.rhs);
        bound_ok = bound_ok && r.pass;
        for (int k = 1; k <= 2 * n - 1; ++k) {
            double c = collapse_products(x, h, k);
            worst_collapse = std::max(worst_collapse, c);
            collapse_ok = collapse_ok && c <= 1.0 + 1e-12;
        }
    }

    std::vector<VerifyRow> rows;
    rows.push_back({"total-bound-sweep", n, kappa, worst_bound, 1.0, bound_ok,
                    seed, trials, 0.0});
    rows.push_back({"collapse-products-sweep", n, kappa, worst_collapse, 1.0,
                    collapse_ok, seed, trials, 0.0});
    return rows;
}

} // namespace msle
