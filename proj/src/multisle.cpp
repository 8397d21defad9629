#include "msle/multisle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "msle/errors.hpp"
#include "msle/geometry.hpp"
#include "msle/random.hpp"

namespace msle {

namespace {

// Resampling knobs: unzip resolution, stored polyline size, sampler step
// controls relative to the unzipped endpoint gap, and the retry budget for
// pulled-back samples that graze a kept curve. All of them trade accuracy
// against chain throughput; the disjointness check below is what keeps the
// state honest at whatever resolution these give.
constexpr std::size_t kUnzipSteps = 384;
constexpr std::size_t kStoredPoints = 512;
constexpr double kDtCapFactor = 0.002;
constexpr double kStopRel = 0.02;
constexpr int kRetryBudget = 8;

bool is_rect(const DomainSpec& d) { return d.kind == DomainKind::rectangle; }

// Unchecked twin of RectMap: the Newton inverse has to evaluate the map a
// hair outside the closed rectangle, which RectMap::map refuses to do.
struct RectCoords {
    double k = 0.0, kprime = 0.0, bigk = 0.0, scale = 0.0, ell = 1.0;

    explicit RectCoords(double ell_) : ell(ell_) {
        rect_modulus_pair(ell_, k, kprime);
        bigk = elliptic_K_comp(kprime);
        scale = 2.0 * bigk / ell_;
    }
    cplx map(cplx u) const {
        return jacobi_elliptic(cplx(scale * u.real() - bigk, scale * u.imag()),
                               k, kprime)
            .sn;
    }
    cplx deriv(cplx u) const {
        Jacobi j = jacobi_elliptic(
            cplx(scale * u.real() - bigk, scale * u.imag()), k, kprime);
        return scale * j.cn * j.dn;
    }
};

cplx clamp_to_rect(cplx u, double ell) {
    return {std::min(std::max(u.real(), 0.0), ell),
            std::min(std::max(u.imag(), 0.0), 1.0)};
}

// damped Newton inverse of the rectangle map; the guess comes from the
// neighbouring polyline point, so a handful of iterations suffices away
// from corners
cplx rect_unmap(const RectCoords& rc, cplx w, cplx guess) {
    cplx u = guess;
    double res = std::abs(rc.map(u) - w);
    double tol = 1e-12 * (1.0 + std::abs(w));
    for (int it = 0; it < 80 && res > tol; ++it) {
        cplx d = rc.deriv(u);
        if (std::abs(d) < 1e-14) {  // corner or pole, nudge off the bad spot
            u += cplx(1e-7, 1e-7);
            res = std::abs(rc.map(u) - w);
            continue;
        }
        cplx step = (rc.map(u) - w) / d;
        cplx next = u - step;
        double nres = std::abs(rc.map(next) - w);
        int halvings = 0;
        while (!(nres < res) && halvings++ < 10) {
            step *= 0.5;
            next = u - step;
            nres = std::abs(rc.map(next) - w);
        }
        if (!(nres < res)) break;
        u = next;
        res = nres;
    }
    if (!(res <= 1e-7 * (1.0 + std::abs(w))))
        throw NumericsError("resample_step: rectangle pullback did not converge");
    return u;
}

// half-plane images of the marks, validated as strictly increasing reals
std::vector<double> marks_on_line(const DomainSpec& dom) {
    std::vector<double> xs(dom.marked.size());
    if (is_rect(dom)) {
        RectCoords rc(dom.ell);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cplx w = rc.map(dom.marked[i]);
            if (!std::isfinite(w.real()) || std::abs(w.real()) > 1e12)
                throw std::invalid_argument(
                    "multisle: mark too close to the top-edge midpoint");
            xs[i] = w.real();
        }
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = dom.marked[i].real();
    }
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] - xs[i - 1] > 1e-12))
            throw std::invalid_argument("multisle: marks out of boundary order");
    return xs;
}

// inward normal at a rectangle boundary point, for seeding the Newton chase
cplx rect_inward(const DomainSpec& dom, cplx m) {
    if (std::abs(m.imag()) <= 1e-9) return {0.0, 1.0};
    if (std::abs(1.0 - m.imag()) <= 1e-9) return {0.0, -1.0};
    if (std::abs(m.real()) <= 1e-9) return {1.0, 0.0};
    (void)dom;
    return {-1.0, 0.0};
}

Curve curve_to_line(const RectCoords& rc, const Curve& c, double xa, double xb) {
    Curve out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        cplx w = rc.map(c[i]);
        out[i] = cplx(w.real(), std::max(w.imag(), 0.0));
    }
    out.front() = cplx(xa, 0.0);
    out.back() = cplx(xb, 0.0);
    return out;
}

struct FlowPoint {
    cplx z;
    bool swallowed = false;
};

// forward Loewner flow of a batch of points through an extracted driver,
// with the same boundary-crossing swallowing rule as solve_forward
void flow_forward(const DrivingFunction& d, std::vector<FlowPoint>& pts) {
    for (FlowPoint& p : pts)
        if (std::abs(p.z - d.values[0]) < kSwallowTol) p.swallowed = true;
    for (std::size_t m = 1; m < d.times.size(); ++m) {
        double dt = d.times[m] - d.times[m - 1];
        double xi = d.values[m];
        for (FlowPoint& p : pts) {
            if (p.swallowed) continue;
            if (p.z.imag() == 0.0) {
                double before = p.z.real() - d.values[m - 1];
                double after = p.z.real() - xi;
                if (std::abs(after) < kSwallowTol || before * after < 0.0) {
                    p.swallowed = true;
                    continue;
                }
            }
            p.z = slit_forward(p.z, xi, dt);
            if (std::abs(p.z - xi) < kSwallowTol) p.swallowed = true;
        }
    }
}

cplx flow_backward(const DrivingFunction& d, cplx u) {
    for (std::size_t m = d.times.size() - 1; m >= 1; --m)
        u = slit_inverse(u, d.values[m], d.times[m] - d.times[m - 1]);
    return u;
}

cplx mobius_in(cplx z, double p) { return -1.0 / (z - p); }
cplx mobius_out(cplx u, double p) { return p - 1.0 / u; }

// One unzipped neighbour: the optional inversion applied before the unzip,
// then the extracted driving function. Pullback undoes them newest first.
struct UnzipStage {
    bool flipped = false;
    double pole = 0.0;
    DrivingFunction driver;
};

// Pole for the inversion that turns the arch over [lo, hi] inside out. The
// pole must sit on the stretch of real axis bordering the targets' component:
// inside every later arch that still encloses the targets, outside every
// later arch that does not (flipping at a point under such an arch would
// wrap it across infinity). Among the admissible gaps, prefer one that is
// wide and keeps its distance from all the curves.
double pick_pole(double lo, double hi, double xa, double xb,
                 const std::vector<std::pair<double, double>>& enclosing,
                 const std::vector<std::pair<double, double>>& forbidden,
                 const std::vector<const Curve*>& bodies) {
    double wlo = lo, whi = hi;
    for (auto [u, v] : enclosing) {
        wlo = std::max(wlo, u);
        whi = std::min(whi, v);
    }
    std::vector<double> cuts{wlo, whi};
    if (xa > wlo && xa < whi) cuts.push_back(xa);
    if (xb > wlo && xb < whi) cuts.push_back(xb);
    for (auto [u, v] : forbidden) {
        if (u > wlo && u < whi) cuts.push_back(u);
        if (v > wlo && v < whi) cuts.push_back(v);
    }
    std::sort(cuts.begin(), cuts.end());
    double best = 0.0;
    double best_score = -1.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double width = cuts[i + 1] - cuts[i];
        if (width <= 0.0 || width < best_score) continue;
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        bool blocked = false;
        for (auto [u, v] : forbidden)
            if (mid > u && mid < v) blocked = true;
        if (blocked) continue;
        double clearance = std::numeric_limits<double>::max();
        for (const Curve* c : bodies)
            for (const cplx& p : *c) clearance = std::min(clearance, std::abs(p - mid));
        double score = std::min(width, 2.0 * clearance);
        if (score > best_score) {
            best_score = score;
            best = mid;
        }
    }
    if (!(best_score > 0.0))
        throw SingularityError("resample_step: no room for the inversion pole");
    return best;
}

Curve thin_curve(const Curve& c, std::size_t max_pts) {
    if (c.size() <= max_pts || max_pts < 2) return c;
    Curve out;
    out.reserve(max_pts);
    for (std::size_t i = 0; i < max_pts; ++i)
        out.push_back(c[i * (c.size() - 1) / (max_pts - 1)]);
    return out;
}

// The sampler may close a stalled run with one long chord; the pullback
// bends straight segments, so a shadow copy with the rare outlier segment
// subdivided hugs the true image and is what the crossing tests see. The
// stored polyline keeps the raw vertices: interpolated points ride a chord
// ballistically, and whole runs of them flatten the extracted driver's
// quadratic variation on exactly the segments that carry the most capacity.
Curve densify_long_segments(const Curve& c) {
    if (c.size() < 3) return c;
    std::vector<double> lens(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) lens[i] = std::abs(c[i + 1] - c[i]);
    std::vector<double> sorted = lens;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double ref = 20.0 * sorted[sorted.size() / 2];
    if (!(ref > 0.0)) return c;
    Curve out;
    out.reserve(c.size());
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        out.push_back(c[i]);
        if (lens[i] > ref) {
            auto extra = std::min<std::size_t>(
                static_cast<std::size_t>(lens[i] / ref) * 4, 64);
            for (std::size_t q = 1; q <= extra; ++q)
                out.push_back(c[i] + (c[i + 1] - c[i]) *
                                         (static_cast<double>(q) /
                                          static_cast<double>(extra + 1)));
        }
    }
    out.push_back(c.back());
    return out;
}

struct Box {
    double xlo, xhi, ylo, yhi;
};

Box box_of(const Curve& c, std::size_t lo, std::size_t hi) {
    Box b{c[lo].real(), c[lo].real(), c[lo].imag(), c[lo].imag()};
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        b.xlo = std::min(b.xlo, c[i].real());
        b.xhi = std::max(b.xhi, c[i].real());
        b.ylo = std::min(b.ylo, c[i].imag());
        b.yhi = std::max(b.yhi, c[i].imag());
    }
    return b;
}

bool boxes_meet(const Box& a, const Box& b) {
    return !(a.xhi < b.xlo || b.xhi < a.xlo || a.yhi < b.ylo || b.yhi < a.ylo);
}

// point ranges are inclusive, so [lo, hi] spans segments lo .. hi-1
bool cross_ranges(const Curve& a, std::size_t alo, std::size_t ahi,
                  const Curve& b, std::size_t blo, std::size_t bhi) {
    if (!boxes_meet(box_of(a, alo, ahi), box_of(b, blo, bhi))) return false;
    std::size_t na = ahi - alo, nb = bhi - blo;
    if (na <= 8 && nb <= 8) {
        for (std::size_t i = alo; i < ahi; ++i)
            for (std::size_t l = blo; l < bhi; ++l)
                if (segments_cross(a[i], a[i + 1], b[l], b[l + 1])) return true;
        return false;
    }
    if (na >= nb) {
        std::size_t mid = alo + na / 2;
        return cross_ranges(a, alo, mid, b, blo, bhi) ||
               cross_ranges(a, mid, ahi, b, blo, bhi);
    }
    std::size_t mid = blo + nb / 2;
    return cross_ranges(a, alo, ahi, b, blo, mid) ||
           cross_ranges(a, alo, ahi, b, mid, bhi);
}

// clamps dust excursions and rejects genuine escapes from the closed domain
void keep_in_domain(const DomainSpec& dom, Curve& c, const char* who) {
    if (is_rect(dom)) {
        for (cplx& p : c) {
            if (p.real() < -1e-9 || p.real() > dom.ell + 1e-9 ||
                p.imag() < -1e-9 || p.imag() > 1.0 + 1e-9)
                throw std::invalid_argument(std::string(who) +
                                            ": curve leaves the rectangle");
            p = clamp_to_rect(p, dom.ell);
        }
    } else {
        for (cplx& p : c) {
            if (p.imag() < -1e-9)
                throw std::invalid_argument(std::string(who) +
                                            ": curve below the real axis");
            p = cplx(p.real(), std::max(p.imag(), 0.0));
        }
    }
}

}  // namespace

MultiCurveState make_state(const Parameters& params, const LinkPattern& pattern,
                           const DomainSpec& domain, std::vector<Curve> curves) {
    if (pattern.n_links() < 1)
        throw std::invalid_argument("make_state: empty link pattern");
    if (domain.kind == DomainKind::disc)
        throw std::invalid_argument(
            "make_state: domain must be the half-plane or a rectangle");
    if (static_cast<int>(domain.marked.size()) != pattern.n_points())
        throw std::invalid_argument("make_state: need one mark per pattern leg");
    if (static_cast<int>(curves.size()) != pattern.n_links())
        throw std::invalid_argument("make_state: need one curve per link");

    DomainSpec dom = domain;
    if (is_rect(dom)) {
        if (!(dom.ell > 0.0))
            throw std::invalid_argument("make_state: bad aspect ratio");
        for (cplx& m : dom.marked) {
            double re = m.real(), im = m.imag();
            double edge = std::min({std::abs(im), std::abs(1.0 - im),
                                    std::abs(re), std::abs(dom.ell - re)});
            if (re < -1e-9 || re > dom.ell + 1e-9 || im < -1e-9 ||
                im > 1.0 + 1e-9 || edge > 1e-9)
                throw std::invalid_argument(
                    "make_state: mark off the rectangle boundary");
            m = clamp_to_rect(m, dom.ell);
            if (std::abs(m.imag()) <= 1e-9)
                m = cplx(m.real(), 0.0);
            else if (std::abs(1.0 - m.imag()) <= 1e-9)
                m = cplx(m.real(), 1.0);
            else if (std::abs(m.real()) <= 1e-9)
                m = cplx(0.0, m.imag());
            else
                m = cplx(dom.ell, m.imag());
        }
    } else {
        for (cplx& m : dom.marked) {
            if (std::abs(m.imag()) > 1e-9)
                throw std::invalid_argument("make_state: mark off the real axis");
            m = cplx(m.real(), 0.0);
        }
    }
    marks_on_line(dom);  // boundary-order check

    for (int i = 0; i < pattern.n_links(); ++i) {
        auto [a, b] = pattern.links[static_cast<std::size_t>(i)];
        Curve& c = curves[static_cast<std::size_t>(i)];
        if (c.size() < 2)
            throw std::invalid_argument("make_state: curve needs two points");
        cplx ma = dom.marked[static_cast<std::size_t>(a - 1)];
        cplx mb = dom.marked[static_cast<std::size_t>(b - 1)];
        double tol = 1e-6 * (1.0 + std::abs(mb - ma));
        if (std::abs(c.front() - ma) > tol || std::abs(c.back() - mb) > tol)
            throw std::invalid_argument("make_state: curve endpoints miss their marks");
        keep_in_domain(dom, c, "make_state");
        c.front() = ma;
        c.back() = mb;
    }
    if (params.kappa <= 4.0) {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (polyline_self_intersects(curves[i]))
                throw std::invalid_argument("make_state: curve crosses itself");
            for (std::size_t l = i + 1; l < curves.size(); ++l)
                if (curves_cross(curves[i], curves[l]))
                    throw std::invalid_argument("make_state: curves cross");
        }
    }
    return {params, pattern, std::move(dom), std::move(curves)};
}

MultiCurveState state_from_paths(const Parameters& params,
                                 const DiscretePolygon& p,
                                 const std::vector<MedialPath>& paths) {
    LinkPattern pattern = classify_pattern(paths);
    DomainSpec dom;
    dom.kind = DomainKind::rectangle;
    dom.ell = p.ell;
    dom.marked.assign(static_cast<std::size_t>(pattern.n_points()), cplx());
    std::vector<Curve> traced(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        traced[i] = path_points(p, paths[i]);
        dom.marked[static_cast<std::size_t>(paths[i].start_mark)] = traced[i].front();
        dom.marked[static_cast<std::size_t>(paths[i].end_mark)] = traced[i].back();
    }
    // curves follow the canonical link order, oriented first leg to second
    std::vector<Curve> curves(paths.size());
    for (int l = 0; l < pattern.n_links(); ++l) {
        auto [a, b] = pattern.links[static_cast<std::size_t>(l)];
        bool found = false;
        for (std::size_t i = 0; i < paths.size() && !found; ++i) {
            if (paths[i].start_mark + 1 == a && paths[i].end_mark + 1 == b) {
                curves[static_cast<std::size_t>(l)] = traced[i];
                found = true;
            } else if (paths[i].start_mark + 1 == b && paths[i].end_mark + 1 == a) {
                curves[static_cast<std::size_t>(l)] = traced[i];
                std::reverse(curves[static_cast<std::size_t>(l)].begin(),
                             curves[static_cast<std::size_t>(l)].end());
                found = true;
            }
        }
        if (!found) throw TracingError("state_from_paths: link without a path");
    }
    return make_state(params, pattern, dom, std::move(curves));
}

double signed_area(const Curve& curve) {
    if (curve.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i)
        twice += curve[i].real() * curve[i + 1].imag() -
                 curve[i + 1].real() * curve[i].imag();
    twice += curve.back().real() * curve.front().imag() -
             curve.front().real() * curve.back().imag();
    return 0.5 * twice;
}

double state_statistic(const MultiCurveState& state) {
    double s = 0.0;
    for (const Curve& c : state.curves) s += signed_area(c);
    return s;
}

Curve arc_curve(cplx a, cplx b, double height, int n_points) {
    if (n_points < 3)
        throw std::invalid_argument("arc_curve: need at least three points");
    if (a == b) throw std::invalid_argument("arc_curve: degenerate chord");
    cplx normal = cplx(0.0, 1.0) * (b - a) / std::abs(b - a);
    Curve out(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        double s = static_cast<double>(i) / static_cast<double>(n_points - 1);
        out[static_cast<std::size_t>(i)] =
            a + (b - a) * s + normal * (height * std::sin(std::numbers::pi * s));
    }
    out.front() = a;
    out.back() = b;
    return out;
}

bool curves_cross(const Curve& a, const Curve& b) {
    if (a.size() < 2 || b.size() < 2) return false;
    return cross_ranges(a, 0, a.size() - 1, b, 0, b.size() - 1);
}

MultiCurveState resample_step(const MultiCurveState& state, int j,
                              std::uint64_t seed) {
    int n = state.pattern.n_links();
    if (j < 0 || j >= n)
        throw std::invalid_argument("resample_step: curve index out of range");
    if (!(state.params.kappa <= 4.0))
        throw std::invalid_argument("resample_step: only kappa <= 4 is resampled");
    if (static_cast<int>(state.curves.size()) != n)
        throw std::invalid_argument("resample_step: malformed state");

    std::vector<double> xs = marks_on_line(state.domain);
    auto [leg_a, leg_b] = state.pattern.links[static_cast<std::size_t>(j)];
    double xa = xs[static_cast<std::size_t>(leg_a - 1)];
    double xb = xs[static_cast<std::size_t>(leg_b - 1)];

    std::optional<RectCoords> rc;
    if (is_rect(state.domain)) rc.emplace(state.domain.ell);

    // neighbouring curves in half-plane coordinates, index order
    std::vector<Curve> live;
    live.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        auto [a, b] = state.pattern.links[static_cast<std::size_t>(i)];
        double fa = xs[static_cast<std::size_t>(a - 1)];
        double fb = xs[static_cast<std::size_t>(b - 1)];
        if (rc) {
            live.push_back(curve_to_line(*rc, state.curves[static_cast<std::size_t>(i)], fa, fb));
        } else {
            Curve c = state.curves[static_cast<std::size_t>(i)];
            for (cplx& p : c) p = cplx(p.real(), std::max(p.imag(), 0.0));
            c.front() = cplx(fa, 0.0);
            c.back() = cplx(fb, 0.0);
            live.push_back(std::move(c));
        }
    }

    // unzip the neighbours one at a time, tracking the target endpoints
    std::vector<UnzipStage> stages;
    stages.reserve(live.size());
    for (std::size_t m = 0; m < live.size(); ++m) {
        if (live[m].empty()) continue;  // cut off earlier, other component
        double am = live[m].front().real();
        double bm = live[m].back().real();
        double lo = std::min(am, bm), hi = std::max(am, bm);
        bool in_a = xa > lo && xa < hi;
        bool in_b = xb > lo && xb < hi;
        if (in_a != in_b)
            throw SingularityError(
                "resample_step: target endpoints straddle a neighbour");
        UnzipStage stage;
        if (in_a) {
            std::vector<std::pair<double, double>> enclosing, forbidden;
            std::vector<const Curve*> bodies{&live[m]};
            for (std::size_t q = m + 1; q < live.size(); ++q) {
                if (live[q].empty()) continue;
                double qa = live[q].front().real();
                double qb = live[q].back().real();
                double qlo = std::min(qa, qb), qhi = std::max(qa, qb);
                if (qlo <= lo || qhi >= hi) continue;  // sits outside this arch
                bool has_a = xa > qlo && xa < qhi;
                bool has_b = xb > qlo && xb < qhi;
                if (has_a != has_b)
                    throw SingularityError(
                        "resample_step: target endpoints straddle a neighbour");
                (has_a ? enclosing : forbidden).emplace_back(qlo, qhi);
                bodies.push_back(&live[q]);
            }
            stage.flipped = true;
            stage.pole = pick_pole(lo, hi, xa, xb, enclosing, forbidden, bodies);
            xa = mobius_in(cplx(xa, 0.0), stage.pole).real();
            xb = mobius_in(cplx(xb, 0.0), stage.pole).real();
            for (std::size_t q = m; q < live.size(); ++q)
                for (cplx& p : live[q]) p = mobius_in(p, stage.pole);
        }
        stage.driver = extract_driver(live[m], kUnzipSteps);

        std::vector<FlowPoint> fp;
        fp.push_back({cplx(xa, 0.0), false});
        fp.push_back({cplx(xb, 0.0), false});
        for (std::size_t q = m + 1; q < live.size(); ++q)
            for (const cplx& p : live[q]) fp.push_back({p, false});
        flow_forward(stage.driver, fp);
        if (fp[0].swallowed || fp[1].swallowed)
            throw SingularityError(
                "resample_step: a neighbour touches a target endpoint");
        xa = fp[0].z.real();
        xb = fp[1].z.real();
        // The driver crossing rule is exact for real points, so the feet
        // decide each neighbour's fate: both gone means it sat in the
        // component the unzip removed, one gone is a genuine collision.
        // Interior points of surviving curves may still brush the tip at
        // polyline resolution; those vertices are dropped as dust.
        std::size_t cursor = 2;
        for (std::size_t q = m + 1; q < live.size(); ++q) {
            std::size_t count = live[q].size();
            if (count == 0) continue;
            bool front_gone = fp[cursor].swallowed;
            bool back_gone = fp[cursor + count - 1].swallowed;
            if (front_gone && back_gone) {
                live[q].clear();
            } else if (front_gone || back_gone) {
                throw SingularityError(
                    "resample_step: unzipping collided with a neighbour");
            } else {
                Curve next;
                next.reserve(count);
                for (std::size_t t = 0; t < count; ++t)
                    if (!fp[cursor + t].swallowed) next.push_back(fp[cursor + t].z);
                live[q] = std::move(next);
            }
            cursor += count;
        }
        stages.push_back(std::move(stage));
    }

    double span = std::abs(xb - xa);
    if (!std::isfinite(span) || span < 1e-12 * (1.0 + std::abs(xa) + std::abs(xb)))
        throw SingularityError("resample_step: degenerate unzipped gap");

    cplx mark_a = state.domain.marked[static_cast<std::size_t>(leg_a - 1)];
    cplx mark_b = state.domain.marked[static_cast<std::size_t>(leg_b - 1)];

    for (int attempt = 0; attempt <= kRetryBudget; ++attempt) {
        Curve cand;
        try {
            cand = sample_chordal_sle_between(
                state.params, xa, xb, kDtCapFactor * span * span, kStopRel,
                mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        } catch (const NumericsError&) {
            continue;
        }
        cand = thin_curve(cand, kStoredPoints);
        if (rc || !stages.empty()) cand = densify_long_segments(cand);
        for (auto s = stages.rbegin(); s != stages.rend(); ++s) {
            for (cplx& p : cand) p = flow_backward(s->driver, p);
            if (s->flipped)
                for (cplx& p : cand) p = mobius_out(p, s->pole);
        }
        if (rc) {
            try {
                Curve rect(cand.size());
                rect.front() = mark_a;
                rect.back() = mark_b;
                cplx guess = mark_a + 1e-4 * rect_inward(state.domain, mark_a);
                for (std::size_t t = 1; t + 1 < cand.size(); ++t) {
                    guess = rect_unmap(*rc, cand[t], guess);
                    rect[t] = clamp_to_rect(guess, state.domain.ell);
                }
                cand = std::move(rect);
            } catch (const NumericsError&) {
                continue;
            }
        } else {
            for (cplx& p : cand) p = cplx(p.real(), std::max(p.imag(), 0.0));
            cand.front() = mark_a;
            cand.back() = mark_b;
        }
        if (polyline_self_intersects(cand)) continue;
        bool clear = true;
        for (int i = 0; i < n && clear; ++i)
            if (i != j && curves_cross(cand, state.curves[static_cast<std::size_t>(i)]))
                clear = false;
        if (!clear) continue;
        MultiCurveState out = state;
        out.curves[static_cast<std::size_t>(j)] = std::move(cand);
        return out;
    }
    throw NumericsError("resample_step: no disjoint sample within the retry budget");
}

std::vector<MultiCurveState> run_resampling_chain(const MultiCurveState& initial,
                                                  int steps, std::uint64_t seed,
                                                  const ChainOptions& options) {
    if (steps < 0)
        throw std::invalid_argument("run_resampling_chain: negative step count");
    if (options.stride < 1 || options.burn_in < 0)
        throw std::invalid_argument("run_resampling_chain: bad recording options");
    if (!(initial.params.kappa <= 4.0))
        throw std::invalid_argument("run_resampling_chain: only kappa <= 4");
    int n = initial.pattern.n_links();
    std::vector<MultiCurveState> trajectory;
    Rng pick(mix_seed(seed, 0));
    MultiCurveState state = initial;
    auto record = [&](int step) {
        if (step >= options.burn_in &&
            (step - options.burn_in) % options.stride == 0)
            trajectory.push_back(state);
    };
    record(0);
    for (int s = 1; s <= steps; ++s) {
        int j = static_cast<int>(pick.uniform_int(static_cast<std::uint64_t>(n)));
        state = resample_step(state, j, mix_seed(seed, static_cast<std::uint64_t>(s)));
        record(s);
    }
    return trajectory;
}

double partition_drift(const PartitionProvider& provider, const BoundaryConfig& x,
                       const LinkPattern& alpha, int j, double kappa) {
    int n2 = 2 * x.n_curves();
    if (alpha.n_points() != n2)
        throw std::invalid_argument("partition_drift: pattern size mismatch");
    if (j < 1 || j > n2)
        throw std::invalid_argument("partition_drift: index out of range");
    double gap = std::numeric_limits<double>::max();
    for (int i = 1; i <= n2; ++i)
        if (i != j) gap = std::min(gap, std::abs(x.at(i) - x.at(j)));
    double h = std::max(1e-4 * gap, 1e-10);
    std::vector<double> plus = x.points(), minus = x.points();
    plus[static_cast<std::size_t>(j - 1)] += h;
    minus[static_cast<std::size_t>(j - 1)] -= h;
    double zp = provider(BoundaryConfig(plus), alpha);
    double zm = provider(BoundaryConfig(minus), alpha);
    if (!(zp > 0.0) || !(zm > 0.0))
        throw std::domain_error("partition_drift: provider must be positive");
    return kappa * (std::log(zp) - std::log(zm)) / (2.0 * h);
}

Curve sample_drifted_chain(const Parameters& params, const BoundaryConfig& x,
                           const LinkPattern& alpha, int j,
                           const PartitionProvider& provider, double dt,
                           std::uint64_t seed) {
    int n2 = 2 * x.n_curves();
    if (alpha.n_points() != n2)
        throw std::invalid_argument("sample_drifted_chain: pattern size mismatch");
    if (j < 1 || j > n2)
        throw std::invalid_argument("sample_drifted_chain: index out of range");
    if (!(dt > 0.0))
        throw std::invalid_argument("sample_drifted_chain: dt must be positive");
    int k = alpha.partner(j);

    std::vector<double> y = x.points();  // slot j-1 carries the driver
    double w = y[static_cast<std::size_t>(j - 1)];
    std::vector<int> side(static_cast<std::size_t>(n2) + 1, 0);
    for (int i = 1; i <= n2; ++i)
        side[static_cast<std::size_t>(i)] = x.at(i) > w ? 1 : -1;

    Rng rng(seed);
    DrivingFunction d;
    d.times.push_back(0.0);
    d.values.push_back(w);
    double t = 0.0;
    double gap0 = std::abs(y[static_cast<std::size_t>(k - 1)] - w);
    constexpr std::size_t kMaxSteps = 4000000;
    for (std::size_t step = 0;; ++step) {
        if (step >= kMaxSteps)
            throw NumericsError("sample_drifted_chain: step budget exhausted");
        double target = y[static_cast<std::size_t>(k - 1)] - w;
        if (std::abs(target) <= 1e-6 * gap0 ||
            target * side[static_cast<std::size_t>(k)] <= 0.0)
            break;
        double g_min = std::abs(target);
        for (int i = 1; i <= n2; ++i) {
            if (i == j || i == k) continue;
            double g = y[static_cast<std::size_t>(i - 1)] - w;
            if (g * side[static_cast<std::size_t>(i)] <= 0.0)
                throw NumericsError(
                    "sample_drifted_chain: spectator collided with the driver, "
                    "reduce dt");
            g_min = std::min(g_min, std::abs(g));
        }
        // near any marked point the step shrinks with the square of the gap,
        // exactly like the plain point-to-point sampler, so the swallowing
        // time is resolved instead of overshot
        double h = std::min(dt, 0.005 * g_min * g_min);
        double drift = partition_drift(provider, BoundaryConfig(y), alpha, j,
                                       params.kappa);
        double w_old = w;
        for (int i = 1; i <= n2; ++i) {
            if (i == j) continue;
            y[static_cast<std::size_t>(i - 1)] +=
                2.0 * h / (y[static_cast<std::size_t>(i - 1)] - w_old);
        }
        w += drift * h + std::sqrt(params.kappa * h) * rng.normal();
        if (!std::isfinite(w))
            throw NumericsError("sample_drifted_chain: non-finite driver");
        y[static_cast<std::size_t>(j - 1)] = w;
        t += h;
        if (t + h == t)
            throw NumericsError("sample_drifted_chain: time step underflow");
        d.times.push_back(t);
        d.values.push_back(w);
    }
    // bound the quadratic backward build for very fine steps
    std::size_t ns = d.n_steps();
    if (ns > 2048) {
        std::size_t stride = (ns + 2047) / 2048;
        DrivingFunction thin;
        thin.times.push_back(d.times[0]);
        thin.values.push_back(d.values[0]);
        for (std::size_t q = stride; q < ns; q += stride) {
            thin.times.push_back(d.times[q]);
            thin.values.push_back(d.values[q]);
        }
        thin.times.push_back(d.times[ns]);
        thin.values.push_back(d.values[ns]);
        d = std::move(thin);
    }
    return curve_from_driver(d);
}

CascadeReport cascade_check(const std::vector<MultiCurveState>& samples, int j,
                            std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("cascade_check: no samples");
    const MultiCurveState& first = samples.front();
    int n = first.pattern.n_links();
    CascadeReport rep;
    if (n == 1) {  // nothing is left once the single curve is conditioned on
        rep.vacuous = true;
        rep.pass = true;
        return rep;
    }
    if (!first.pattern.contains(j, j + 1))
        throw std::invalid_argument("cascade_check: pattern has no link {j, j+1}");
    for (const MultiCurveState& s : samples)
        if (!(s.pattern == first.pattern))
            throw std::invalid_argument("cascade_check: samples mix patterns");
    if (samples.size() < 40)
        throw std::invalid_argument("cascade_check: need at least 40 samples");

    int link_idx = -1;
    for (int i = 0; i < n; ++i)
        if (first.pattern.links[static_cast<std::size_t>(i)] ==
            std::pair<int, int>{j, j + 1})
            link_idx = i;

    auto complement_area = [&](const MultiCurveState& s) {
        double a = 0.0;
        for (int i = 0; i < n; ++i)
            if (i != link_idx) a += signed_area(s.curves[static_cast<std::size_t>(i)]);
        return a;
    };

    std::size_t half = samples.size() / 2;
    std::vector<double> cond, direct;
    cond.reserve(half);
    direct.reserve(samples.size() - half);
    for (std::size_t s = 0; s < half; ++s) cond.push_back(complement_area(samples[s]));
    for (std::size_t s = half; s < samples.size(); ++s) {
        MultiCurveState st = samples[s];
        for (int i = 0; i < n; ++i)
            if (i != link_idx)
                st = resample_step(st, i, mix_seed(seed, s, static_cast<std::uint64_t>(i)));
        direct.push_back(complement_area(st));
    }
    rep.n_conditional = cond.size();
    rep.n_direct = direct.size();
    rep.area_test = ks_two_sample(cond, direct, 0.01);
    rep.pass = !rep.area_test.reject;
    return rep;
}

int n_kappa(double kappa) {
    if (!(kappa > 4.0) || !(kappa < 8.0))
        throw std::invalid_argument("n_kappa: kappa must lie in (4, 8)");
    double r = kappa / (8.0 - kappa);
    // exact integer ratios (16/3 gives 2, 6 gives 3) must not round up
    return static_cast<int>(std::ceil(r - 1e-9)) + 1;
}

void write_trajectory(const std::string& dir,
                      const std::vector<MultiCurveState>& trajectory,
                      std::uint64_t seed, int stride) {
    if (trajectory.empty())
        throw std::invalid_argument("write_trajectory: empty trajectory");
    if (stride < 1) throw std::invalid_argument("write_trajectory: bad stride");
    const MultiCurveState& first = trajectory.front();
    for (const MultiCurveState& s : trajectory)
        if (!(s.pattern == first.pattern))
            throw std::invalid_argument("write_trajectory: states mix patterns");

    std::filesystem::create_directories(dir);
    nlohmann::json man;
    man["seed"] = seed;
    man["kappa"] = first.params.kappa;
    man["pattern"] = to_string(first.pattern);
    man["stride"] = stride;
    man["states"] = trajectory.size();
    man["domain"] = is_rect(first.domain) ? "rectangle" : "half-plane";
    man["ell"] = first.domain.ell;
    nlohmann::json marks = nlohmann::json::array();
    for (const cplx& m : first.domain.marked)
        marks.push_back({m.real(), m.imag()});
    man["marks"] = std::move(marks);
    std::ofstream out(std::filesystem::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("write_trajectory: cannot open manifest");
    out << man.dump(2) << '\n';

    char name[64];
    for (std::size_t s = 0; s < trajectory.size(); ++s) {
        for (int i = 0; i < first.pattern.n_links(); ++i) {
            std::snprintf(name, sizeof name, "curve-%04zu-%d.txt", s, i);
            write_curve((std::filesystem::path(dir) / name).string(),
                        trajectory[s].curves[static_cast<std::size_t>(i)], 0.0,
                        first.params.kappa, seed);
        }
    }
}

TrajectoryFile read_trajectory(const std::string& dir) {
    std::ifstream in(std::filesystem::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("read_trajectory: cannot open manifest");
    nlohmann::json man;
    try {
        in >> man;
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("read_trajectory: malformed manifest");
    }
    TrajectoryFile out;
    try {
        out.seed = man.at("seed").get<std::uint64_t>();
        out.stride = man.at("stride").get<int>();
        double kappa = man.at("kappa").get<double>();
        LinkPattern pattern = parse_pattern(man.at("pattern").get<std::string>());
        std::string kind = man.at("domain").get<std::string>();
        if (kind != "rectangle" && kind != "half-plane")
            throw std::invalid_argument("read_trajectory: unknown domain kind");
        DomainSpec dom;
        dom.kind = kind == "rectangle" ? DomainKind::rectangle
                                       : DomainKind::half_plane;
        dom.ell = man.at("ell").get<double>();
        for (const auto& m : man.at("marks"))
            dom.marked.emplace_back(m.at(0).get<double>(), m.at(1).get<double>());
        std::size_t count = man.at("states").get<std::size_t>();
        Parameters params = make_parameters(kappa);
        char name[64];
        for (std::size_t s = 0; s < count; ++s) {
            std::vector<Curve> curves;
            curves.reserve(static_cast<std::size_t>(pattern.n_links()));
            for (int i = 0; i < pattern.n_links(); ++i) {
                std::snprintf(name, sizeof name, "curve-%04zu-%d.txt", s, i);
                curves.push_back(
                    read_curve((std::filesystem::path(dir) / name).string()).points);
            }
            out.states.push_back(make_state(params, pattern, dom, std::move(curves)));
        }
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("read_trajectory: malformed manifest");
    }
    return out;
}

}  // namespace msle
