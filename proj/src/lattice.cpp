#include "msle/lattice.hpp"

#include <cmath>
#include <stdexcept>

#include "msle/errors.hpp"

namespace msle {

std::pair<int, int> DiscretePolygon::edge_vertices(int e) const {
    if (edge_is_horizontal(e)) {
        int i = e % nx, j = e / nx;
        return {vertex_id(i, j), vertex_id(i + 1, j)};
    }
    int r = e - nx * (ny + 1);
    int i = r % (nx + 1), j = r / (nx + 1);
    return {vertex_id(i, j), vertex_id(i, j + 1)};
}

cplx DiscretePolygon::edge_midpoint(int e) const {
    auto [a, b] = edge_vertices(e);
    return 0.5 * (vertex_pos(a) + vertex_pos(b));
}

int DiscretePolygon::edge_between_vertices(int u, int v) const {
    auto [ui, uj] = vertex_ij(u);
    auto [vi, vj] = vertex_ij(v);
    if (uj == vj && std::abs(ui - vi) == 1)
        return horizontal_edge(std::min(ui, vi), uj);
    if (ui == vi && std::abs(uj - vj) == 1)
        return vertical_edge(ui, std::min(uj, vj));
    throw std::invalid_argument("edge_between_vertices: vertices not adjacent");
}

std::pair<int, int> DiscretePolygon::faces_of_edge(int e) const {
    if (edge_is_horizontal(e)) {
        int i = e % nx, j = e / nx;
        int below = (j == 0) ? outer_face() : (j - 1) * nx + i;
        int above = (j == ny) ? outer_face() : j * nx + i;
        return {below, above};
    }
    int r = e - nx * (ny + 1);
    int i = r % (nx + 1), j = r / (nx + 1);
    int left = (i == 0) ? outer_face() : j * nx + (i - 1);
    int right = (i == nx) ? outer_face() : j * nx + i;
    return {left, right};
}

int DiscretePolygon::edge_between_faces(int f1, int f2) const {
    if (f1 == f2)
        throw std::invalid_argument("edge_between_faces: identical faces");
    // orient so f1 is a cell; two boundary cells can both touch the outer
    // face, so the pair (cell, outer) is resolved by the cell's position
    if (f1 == outer_face()) std::swap(f1, f2);
    if (f1 == outer_face())
        throw std::invalid_argument("edge_between_faces: both faces outer");
    int i1 = f1 % nx, j1 = f1 / nx;
    if (f2 == outer_face()) {
        // a corner cell touches the outer face through two edges; this
        // lookup is only defined for cells with a unique outer side
        int sides = 0;
        int e = -1;
        if (j1 == 0) { ++sides; e = horizontal_edge(i1, 0); }
        if (j1 == ny - 1) { ++sides; e = horizontal_edge(i1, ny); }
        if (i1 == 0) { ++sides; e = vertical_edge(0, j1); }
        if (i1 == nx - 1) { ++sides; e = vertical_edge(nx, j1); }
        if (sides == 0)
            throw std::invalid_argument("edge_between_faces: faces not adjacent");
        if (sides > 1)
            throw std::invalid_argument("edge_between_faces: ambiguous outer side");
        return e;
    }
    int i2 = f2 % nx, j2 = f2 / nx;
    if (i1 == i2 && j2 == j1 + 1) return horizontal_edge(i1, j2);
    if (i1 == i2 && j2 == j1 - 1) return horizontal_edge(i1, j1);
    if (j1 == j2 && i2 == i1 + 1) return vertical_edge(i2, j1);
    if (j1 == j2 && i2 == i1 - 1) return vertical_edge(i1, j1);
    throw std::invalid_argument("edge_between_faces: faces not adjacent");
}

std::vector<int> DiscretePolygon::arc(int i) const {
    int m = n_marks();
    if (i < 0 || i >= m) throw std::out_of_range("arc: mark index");
    std::size_t from = marked[static_cast<std::size_t>(i)];
    std::size_t to = marked[static_cast<std::size_t>((i + 1) % m)];
    std::vector<int> out;
    std::size_t nb = boundary.size();
    for (std::size_t k = from;; k = (k + 1) % nb) {
        out.push_back(boundary[k]);
        if (k == to) break;
    }
    return out;
}

DiscretePolygon build_rectangle(double ell, double delta,
                                const std::vector<double>& mark_fractions) {
    if (!(ell > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("build_rectangle: dimensions must be positive");
    double fx = ell / delta, fy = 1.0 / delta;
    int nx = static_cast<int>(std::llround(fx));
    int ny = static_cast<int>(std::llround(fy));
    if (nx < 1 || ny < 1 || std::abs(fx - nx) > 1e-6 * fx ||
        std::abs(fy - ny) > 1e-6 * fy)
        throw std::invalid_argument("build_rectangle: delta must divide both sides");
    if (mark_fractions.size() < 2 || mark_fractions.size() % 2 != 0)
        throw std::invalid_argument("build_rectangle: need 2N marks");
    for (std::size_t i = 0; i < mark_fractions.size(); ++i) {
        double f = mark_fractions[i];
        if (!(f >= 0.0) || !(f < 1.0))
            throw std::invalid_argument("build_rectangle: fractions must lie in [0,1)");
        if (i > 0 && f <= mark_fractions[i - 1])
            throw std::invalid_argument("build_rectangle: fractions must increase");
    }

    DiscretePolygon p;
    p.delta = delta;
    p.ell = ell;
    p.nx = nx;
    p.ny = ny;

    // counterclockwise cycle: bottom, right, top, left
    for (int i = 0; i < nx; ++i) p.boundary.push_back(p.vertex_id(i, 0));
    for (int j = 0; j < ny; ++j) p.boundary.push_back(p.vertex_id(nx, j));
    for (int i = nx; i > 0; --i) p.boundary.push_back(p.vertex_id(i, ny));
    for (int j = ny; j > 0; --j) p.boundary.push_back(p.vertex_id(0, j));

    std::size_t nb = p.boundary.size();
    for (double f : mark_fractions) {
        // llround rounds a half step up, which is the counterclockwise side
        auto idx = static_cast<std::size_t>(
            std::llround(f * static_cast<double>(nb)));
        if (idx == nb) idx = 0;
        if (!p.marked.empty() && idx <= p.marked.back())
            throw ResolutionError(
                "build_rectangle: marks collide or lose cyclic order at this mesh");
        p.marked.push_back(idx);
    }
    return p;
}

int euler_characteristic(const DiscretePolygon& p) {
    return p.n_vertices() - p.n_edges() + p.n_cells() + 1;
}

MedialGraph medial_graph(const DiscretePolygon& p) {
    MedialGraph m;
    m.position.resize(static_cast<std::size_t>(p.n_edges()));
    for (int e = 0; e < p.n_edges(); ++e)
        m.position[static_cast<std::size_t>(e)] = p.edge_midpoint(e);

    m.cell_edges.resize(static_cast<std::size_t>(p.n_cells()));
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i)
            m.cell_edges[static_cast<std::size_t>(j * p.nx + i)] = {
                p.horizontal_edge(i, j), p.vertical_edge(i + 1, j),
                p.horizontal_edge(i, j + 1), p.vertical_edge(i, j)};

    std::size_t nb = p.boundary.size();
    for (int k = 0; k < p.n_marks(); ++k) {
        std::size_t pos = p.marked[static_cast<std::size_t>(k)];
        int a = p.boundary[pos];
        int b = p.boundary[(pos + 1) % nb];
        auto [ai, aj] = p.vertex_ij(a);
        auto [bi, bj] = p.vertex_ij(b);
        int e;
        if (aj == bj)
            e = p.horizontal_edge(std::min(ai, bi), aj);
        else
            e = p.vertical_edge(ai, std::min(aj, bj));
        m.marked.push_back(e);
    }
    return m;
}

LinkPattern classify_pattern(const std::vector<MedialPath>& paths) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(paths.size());
    for (const MedialPath& pth : paths)
        pairs.emplace_back(pth.start_mark + 1, pth.end_mark + 1);
    return pattern_of_matching(pairs);
}

std::vector<cplx> path_points(const DiscretePolygon& p, const MedialPath& path) {
    std::vector<cplx> pts;
    pts.reserve(path.edges.size());
    for (int e : path.edges) pts.push_back(p.edge_midpoint(e));
    return pts;
}

} // namespace msle
