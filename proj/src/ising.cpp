#include "msle/ising.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "msle/errors.hpp"

namespace msle {

std::vector<std::int8_t> alternating_boundary_spins(const DiscretePolygon& p) {
    if (p.n_marks() < 2 || p.n_marks() % 2 != 0)
        throw std::invalid_argument("alternating_boundary_spins: need 2N marks");
    std::vector<std::int8_t> s(p.n_vertices(), 0);
    for (int a = 0; a < p.n_marks(); ++a) {
        std::int8_t sign = (a % 2 == 0) ? std::int8_t{1} : std::int8_t{-1};
        std::vector<int> verts = p.arc(a);
        // skip the first vertex: a mark belongs to the arc ending at it
        for (std::size_t k = 1; k < verts.size(); ++k) s[verts[k]] = sign;
    }
    return s;
}

void heat_bath_sweeps(SpinConfig& cfg, int sweeps, Rng& rng) {
    const DiscretePolygon& p = cfg.polygon;
    const double beta = ising_beta_critical();
    double p_plus[9];
    for (int f = -4; f <= 4; ++f)
        p_plus[f + 4] = 1.0 / (1.0 + std::exp(-2.0 * beta * f));

    std::vector<int> free_sites;
    for (int j = 0; j <= p.ny; ++j)
        for (int i = 0; i <= p.nx; ++i) {
            int v = p.vertex_id(i, j);
            if (cfg.boundary_fixed[v] != 0) continue;
            if (p.on_boundary(i, j))
                throw std::invalid_argument("heat_bath_sweeps: free vertex on the rim");
            free_sites.push_back(v);
        }

    const int w = p.nx + 1;
    for (int sweep = 0; sweep < sweeps; ++sweep)
        for (int v : free_sites) {
            int field = cfg.spins[v - 1] + cfg.spins[v + 1] + cfg.spins[v - w] +
                        cfg.spins[v + w];
            cfg.spins[v] =
                rng.uniform() < p_plus[field + 4] ? std::int8_t{1} : std::int8_t{-1};
        }
}

SpinConfig sample_critical_ising(const DiscretePolygon& p, int sweeps,
                                 std::uint64_t seed) {
    if (sweeps < 1)
        throw std::invalid_argument("sample_critical_ising: sweeps must be >= 1");
    SpinConfig cfg;
    cfg.polygon = p;
    cfg.boundary_fixed = alternating_boundary_spins(p);
    cfg.spins = cfg.boundary_fixed;
    Rng rng(seed);
    for (std::int8_t& s : cfg.spins)
        if (s == 0) s = rng.uniform() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
    heat_bath_sweeps(cfg, sweeps, rng);
    return cfg;
}

int ising_default_sweeps(const DiscretePolygon& p) {
    int l = std::max(p.nx, p.ny);
    return 10 * l * l;
}

namespace {

// corner vertex ids of a cell: a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1)
struct Corners {
    int a, b, c, d;
};

Corners corners(const DiscretePolygon& p, int cell) {
    int i = cell % p.nx, j = cell / p.nx;
    return {p.vertex_id(i, j), p.vertex_id(i + 1, j), p.vertex_id(i + 1, j + 1),
            p.vertex_id(i, j + 1)};
}

// Vertex on the left of a directed crossing, by the side crossed and the
// travel direction. Sides follow MedialGraph order: 0 bottom, 1 right,
// 2 top, 3 left. Entering a cell through its bottom side means heading up,
// so the left-hand vertex is the a corner; the other cases rotate likewise.
int entry_left(const Corners& c, int side) {
    switch (side) {
        case 0: return c.a;
        case 1: return c.b;
        case 2: return c.c;
        default: return c.d;
    }
}

// leaving through a side reverses the direction, shifting the table by one
int exit_left(const Corners& c, int side) {
    switch (side) {
        case 0: return c.b;
        case 1: return c.c;
        case 2: return c.d;
        default: return c.a;
    }
}

} // namespace

std::vector<MedialPath> trace_interfaces(const SpinConfig& cfg) {
    const DiscretePolygon& p = cfg.polygon;
    const MedialGraph med = medial_graph(p);
    const int n_marks = p.n_marks();
    if (n_marks < 2 || n_marks % 2 != 0)
        throw TracingError("trace_interfaces: need 2N marked vertices");
    for (int v = 0; v < p.n_vertices(); ++v)
        if (cfg.spins[v] != 1 && cfg.spins[v] != -1)
            throw TracingError("trace_interfaces: configuration has unset spins");

    auto frustrated = [&](int e) {
        auto [u, v] = p.edge_vertices(e);
        return cfg.spins[u] != cfg.spins[v];
    };

    // The wall end at a mark sits on whichever of the two incident boundary
    // edges is frustrated; the alternating rule makes that exactly one.
    const std::size_t nb = p.boundary.size();
    std::vector<int> end_edge(n_marks);
    for (int m = 0; m < n_marks; ++m) {
        std::size_t pos = p.marked[static_cast<std::size_t>(m)];
        int prev = p.boundary[(pos + nb - 1) % nb];
        int arriving = p.edge_between_vertices(prev, p.mark_vertex(m));
        int leaving = med.marked[static_cast<std::size_t>(m)];
        bool fa = frustrated(arriving), fl = frustrated(leaving);
        if (fa == fl)
            throw TracingError("trace_interfaces: boundary does not alternate at a mark");
        end_edge[m] = fl ? leaving : arriving;
    }

    // cell entered when crossing a boundary edge inward, and through which side
    auto inner_cell_side = [&](int e) {
        auto [f1, f2] = p.faces_of_edge(e);
        int cell = (f1 == p.outer_face()) ? f2 : f1;
        for (int s = 0; s < 4; ++s)
            if (med.cell_edges[static_cast<std::size_t>(cell)][static_cast<std::size_t>(s)] == e)
                return std::pair<int, int>{cell, s};
        throw TracingError("trace_interfaces: marked edge not on its cell");
    };

    // a wall starts at a mark when the inward crossing keeps +1 on the left
    std::vector<int> startable;
    for (int m = 0; m < n_marks; ++m) {
        auto [cell, side] = inner_cell_side(end_edge[m]);
        if (cfg.spins[entry_left(corners(p, cell), side)] == 1) startable.push_back(m);
    }
    if (static_cast<int>(startable.size()) != n_marks / 2)
        throw TracingError("trace_interfaces: wrong number of wall starts");

    std::vector<char> crossed(static_cast<std::size_t>(p.n_edges()), 0);
    auto cross = [&](int e) {
        if (crossed[static_cast<std::size_t>(e)])
            throw TracingError("trace_interfaces: wall revisited a crossing");
        crossed[static_cast<std::size_t>(e)] = 1;
    };

    std::vector<MedialPath> paths;
    const int step_cap = 4 * p.n_cells() + 4;
    for (int m : startable) {
        MedialPath path;
        path.start_mark = m;
        auto [cell, side] = inner_cell_side(end_edge[m]);
        path.edges.push_back(end_edge[m]);
        cross(end_edge[m]);
        for (int step = 0;; ++step) {
            if (step > step_cap)
                throw TracingError("trace_interfaces: wall failed to terminate");
            const auto& sides = med.cell_edges[static_cast<std::size_t>(cell)];
            int n_frus = 0, only = -1;
            for (int s = 0; s < 4; ++s) {
                if (s == side || !frustrated(sides[static_cast<std::size_t>(s)])) continue;
                ++n_frus;
                only = s;
            }
            int exit_side;
            if (n_frus == 1)
                exit_side = only;
            else if (n_frus == 3)
                exit_side = (side + 3) % 4; // checkerboard cell: take the left turn
            else
                throw TracingError("trace_interfaces: wall parity broken in a cell");
            Corners c = corners(p, cell);
            if (cfg.spins[exit_left(c, exit_side)] != 1)
                throw TracingError("trace_interfaces: minus spin on the left");
            int exit_edge = sides[static_cast<std::size_t>(exit_side)];
            path.edges.push_back(exit_edge);
            cross(exit_edge);

            int ci = cell % p.nx, cj = cell / p.nx;
            switch (exit_side) {
                case 0: --cj; break;
                case 1: ++ci; break;
                case 2: ++cj; break;
                default: --ci; break;
            }
            if (ci < 0 || cj < 0 || ci >= p.nx || cj >= p.ny) {
                auto it = std::find(end_edge.begin(), end_edge.end(), exit_edge);
                if (it == end_edge.end())
                    throw TracingError("trace_interfaces: wall left the domain away from a mark");
                path.end_mark = static_cast<int>(it - end_edge.begin());
                break;
            }
            cell = cj * p.nx + ci;
            side = (exit_side + 2) % 4;
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

std::string spins_to_text(const SpinConfig& cfg) {
    const DiscretePolygon& p = cfg.polygon;
    std::ostringstream out;
    out << "ising-spins 1\n";
    out << std::setprecision(17) << p.ell << ' ' << p.delta << ' ' << p.nx << ' '
        << p.ny << '\n';
    out << p.n_marks();
    for (std::size_t pos : p.marked) out << ' ' << pos;
    out << '\n';
    for (int j = 0; j <= p.ny; ++j) {
        for (int i = 0; i <= p.nx; ++i)
            out << (cfg.spins[p.vertex_id(i, j)] == 1 ? '+' : '-');
        out << '\n';
    }
    return out.str();
}

SpinConfig spins_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (!in || tag != "ising-spins" || version != 1)
        throw std::invalid_argument("spins_from_text: not an ising-spins dump");
    double ell = 0, delta = 0;
    int nx = 0, ny = 0, n_marks = 0;
    in >> ell >> delta >> nx >> ny >> n_marks;
    if (!in || n_marks < 2)
        throw std::invalid_argument("spins_from_text: malformed header");
    std::vector<std::size_t> positions(static_cast<std::size_t>(n_marks));
    for (auto& pos : positions) in >> pos;
    if (!in) throw std::invalid_argument("spins_from_text: malformed mark list");

    // cycle position over cycle length reproduces the snapped vertex exactly
    std::size_t nb = 2 * static_cast<std::size_t>(nx + ny);
    std::vector<double> fractions;
    fractions.reserve(positions.size());
    for (std::size_t pos : positions)
        fractions.push_back(static_cast<double>(pos) / static_cast<double>(nb));
    SpinConfig cfg;
    cfg.polygon = build_rectangle(ell, delta, fractions);
    if (cfg.polygon.nx != nx || cfg.polygon.ny != ny || cfg.polygon.marked != positions)
        throw std::invalid_argument("spins_from_text: header does not fit the grid");

    cfg.spins.assign(static_cast<std::size_t>(cfg.polygon.n_vertices()), 0);
    cfg.boundary_fixed = cfg.spins;
    for (int j = 0; j <= ny; ++j) {
        std::string row;
        in >> row;
        if (!in || row.size() != static_cast<std::size_t>(nx + 1))
            throw std::invalid_argument("spins_from_text: bad sign row");
        for (int i = 0; i <= nx; ++i) {
            char ch = row[static_cast<std::size_t>(i)];
            if (ch != '+' && ch != '-')
                throw std::invalid_argument("spins_from_text: bad sign character");
            std::int8_t s = ch == '+' ? std::int8_t{1} : std::int8_t{-1};
            cfg.spins[cfg.polygon.vertex_id(i, j)] = s;
            if (cfg.polygon.on_boundary(i, j))
                cfg.boundary_fixed[cfg.polygon.vertex_id(i, j)] = s;
        }
    }
    return cfg;
}

} // namespace msle
