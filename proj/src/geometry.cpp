#include "msle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msle {

namespace {

double dot(cplx u, cplx v) { return u.real() * v.real() + u.imag() * v.imag(); }

double cross(cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}

double point_segment_distance(cplx p, cplx a, cplx b) {
    cplx d = b - a;
    double len2 = dot(d, d);
    if (len2 <= 0.0) return std::abs(p - a);
    double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

}  // namespace

double segment_distance(cplx a1, cplx a2, cplx b1, cplx b2) {
    cplx d1 = a2 - a1, d2 = b2 - b1, r = a1 - b1;
    double A = dot(d1, d1), E = dot(d2, d2);
    if (A <= 0.0 && E <= 0.0) return std::abs(a1 - b1);
    if (A <= 0.0) return point_segment_distance(a1, b1, b2);
    if (E <= 0.0) return point_segment_distance(b1, a1, a2);

    double B = dot(d1, d2), C = dot(d1, r), F = dot(d2, r);
    double denom = A * E - B * B;
    double s = denom > 0.0 ? std::clamp((B * F - C * E) / denom, 0.0, 1.0) : 0.0;
    double t = (B * s + F) / E;
    if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-C / A, 0.0, 1.0);
    } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((B - C) / A, 0.0, 1.0);
    }
    return std::abs((a1 + s * d1) - (b1 + t * d2));
}

bool segments_cross(cplx a1, cplx a2, cplx b1, cplx b2) {
    double o1 = cross(a1, a2, b1);
    double o2 = cross(a1, a2, b2);
    double o3 = cross(b1, b2, a1);
    double o4 = cross(b1, b2, a2);
    return ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) &&
           ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0));
}

bool polyline_self_intersects(const std::vector<cplx>& pts) {
    if (pts.size() < 4) return false;
    std::size_t n = pts.size() - 1;
    std::vector<double> x0(n), x1(n), y0(n), y1(n);
    for (std::size_t i = 0; i < n; ++i) {
        x0[i] = std::min(pts[i].real(), pts[i + 1].real());
        x1[i] = std::max(pts[i].real(), pts[i + 1].real());
        y0[i] = std::min(pts[i].imag(), pts[i + 1].imag());
        y1[i] = std::max(pts[i].imag(), pts[i + 1].imag());
    }
    for (std::size_t i = 0; i + 2 < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (x1[i] < x0[j] || x1[j] < x0[i] || y1[i] < y0[j] || y1[j] < y0[i])
                continue;
            if (segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
        }
    return false;
}

namespace {

struct Box {
    double x0, y0, x1, y1;
};

double box_distance(const Box& a, const Box& b) {
    double dx = std::max({b.x0 - a.x1, a.x0 - b.x1, 0.0});
    double dy = std::max({b.y0 - a.y1, a.y0 - b.y1, 0.0});
    return std::hypot(dx, dy);
}

// static bounding-box hierarchy over the segments of one polyline
struct SegTree {
    struct Node {
        Box box;
        int left = -1, right = -1;
        int beg = 0, end = 0;  // leaf range into order
    };
    const std::vector<cplx>* pts = nullptr;
    std::vector<int> order;  // segment indices, permuted by the build
    std::vector<Node> nodes;

    cplx seg_a(int s) const { return (*pts)[static_cast<std::size_t>(s)]; }
    cplx seg_b(int s) const {
        std::size_t i = static_cast<std::size_t>(s);
        return i + 1 < pts->size() ? (*pts)[i + 1] : (*pts)[i];
    }

    Box seg_box(int s) const {
        cplx a = seg_a(s), b = seg_b(s);
        return {std::min(a.real(), b.real()), std::min(a.imag(), b.imag()),
                std::max(a.real(), b.real()), std::max(a.imag(), b.imag())};
    }

    int build(int beg, int end) {
        Node node;
        node.box = seg_box(order[static_cast<std::size_t>(beg)]);
        for (int i = beg + 1; i < end; ++i) {
            Box sb = seg_box(order[static_cast<std::size_t>(i)]);
            node.box.x0 = std::min(node.box.x0, sb.x0);
            node.box.y0 = std::min(node.box.y0, sb.y0);
            node.box.x1 = std::max(node.box.x1, sb.x1);
            node.box.y1 = std::max(node.box.y1, sb.y1);
        }
        int id = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (end - beg <= 8) {
            nodes[static_cast<std::size_t>(id)].beg = beg;
            nodes[static_cast<std::size_t>(id)].end = end;
            return id;
        }
        bool split_x = node.box.x1 - node.box.x0 >= node.box.y1 - node.box.y0;
        int mid = beg + (end - beg) / 2;
        auto key = [&](int s) {
            cplx m = 0.5 * (seg_a(s) + seg_b(s));
            return split_x ? m.real() : m.imag();
        };
        std::nth_element(order.begin() + beg, order.begin() + mid, order.begin() + end,
                         [&](int u, int v) { return key(u) < key(v); });
        int l = build(beg, mid);
        int r = build(mid, end);
        nodes[static_cast<std::size_t>(id)].left = l;
        nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    explicit SegTree(const std::vector<cplx>& points) : pts(&points) {
        int nseg = std::max<int>(1, static_cast<int>(points.size()) - 1);
        order.resize(static_cast<std::size_t>(nseg));
        for (int i = 0; i < nseg; ++i) order[static_cast<std::size_t>(i)] = i;
        build(0, nseg);
    }
};

void tree_query(const SegTree& ta, int ia, const SegTree& tb, int ib, double& best,
                double stop_below) {
    if (best < stop_below) return;
    const auto& na = ta.nodes[static_cast<std::size_t>(ia)];
    const auto& nb = tb.nodes[static_cast<std::size_t>(ib)];
    if (box_distance(na.box, nb.box) >= best) return;
    bool la = na.left < 0, lb = nb.left < 0;
    if (la && lb) {
        for (int i = na.beg; i < na.end; ++i)
            for (int j = nb.beg; j < nb.end; ++j) {
                int sa = ta.order[static_cast<std::size_t>(i)];
                int sb = tb.order[static_cast<std::size_t>(j)];
                best = std::min(best, segment_distance(ta.seg_a(sa), ta.seg_b(sa),
                                                       tb.seg_a(sb), tb.seg_b(sb)));
                if (best < stop_below) return;
            }
        return;
    }
    // descend the node with the larger box to keep boxes comparable
    double area_a = (na.box.x1 - na.box.x0) + (na.box.y1 - na.box.y0);
    double area_b = (nb.box.x1 - nb.box.x0) + (nb.box.y1 - nb.box.y0);
    if (lb || (!la && area_a >= area_b)) {
        tree_query(ta, na.left, tb, ib, best, stop_below);
        tree_query(ta, na.right, tb, ib, best, stop_below);
    } else {
        tree_query(ta, ia, tb, nb.left, best, stop_below);
        tree_query(ta, ia, tb, nb.right, best, stop_below);
    }
}

}  // namespace

double polyline_distance(const std::vector<cplx>& a, const std::vector<cplx>& b,
                         double stop_below) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("polyline_distance: empty polyline");
    SegTree ta(a), tb(b);
    double best = std::numeric_limits<double>::infinity();
    tree_query(ta, 0, tb, 0, best, stop_below);
    return best;
}

double frechet_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("frechet_distance: empty curve");
    std::size_t nb = b.size();
    std::vector<double> prev(nb), cur(nb);
    cur[0] = std::abs(a[0] - b[0]);
    for (std::size_t j = 1; j < nb; ++j)
        cur[j] = std::max(cur[j - 1], std::abs(a[0] - b[j]));
    for (std::size_t i = 1; i < a.size(); ++i) {
        std::swap(prev, cur);
        cur[0] = std::max(prev[0], std::abs(a[i] - b[0]));
        for (std::size_t j = 1; j < nb; ++j) {
            double reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
            cur[j] = std::max(reach, std::abs(a[i] - b[j]));
        }
    }
    return cur[nb - 1];
}

}  // namespace msle
