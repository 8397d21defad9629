#include "msle/randomcluster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "msle/errors.hpp"

namespace msle {

namespace {

void check_q(double q, const char* who) {
    if (!(q >= 1.0 && q < 4.0))
        throw std::invalid_argument(std::string(who) + ": q must lie in [1,4)");
}

BondConfig bare_config(const DiscretePolygon& p, double q, double bond_p,
                       const char* who) {
    check_q(q, who);
    if (bond_p < 0.0) bond_p = fk_p_critical(q);
    if (!(bond_p > 0.0 && bond_p < 1.0))
        throw std::invalid_argument(std::string(who) + ": p must lie in (0,1)");
    BondConfig cfg;
    cfg.polygon = p;
    cfg.omega.assign(static_cast<std::size_t>(p.n_edges()), 0);
    cfg.frozen = cfg.omega;
    cfg.wired_class.assign(static_cast<std::size_t>(p.n_vertices()), -1);
    cfg.q = q;
    cfg.p = bond_p;
    return cfg;
}

} // namespace

double fk_p_critical(double q) {
    check_q(q, "fk_p_critical");
    double r = std::sqrt(q);
    return r / (1.0 + r);
}

double fk_interface_kappa(double q) {
    check_q(q, "fk_interface_kappa");
    return 4.0 * std::numbers::pi / std::acos(-0.5 * std::sqrt(q));
}

BondConfig fk_config_alternating(const DiscretePolygon& p, double q,
                                 double bond_p) {
    BondConfig cfg = bare_config(p, q, bond_p, "fk_config_alternating");
    cfg.wiring = Wiring::alternating;
    for (int t = 0; 2 * t < p.n_marks(); ++t) {
        std::vector<int> arc = p.arc(2 * t);
        std::vector<int> block(arc.begin() + 1, arc.end());
        for (int v : block) cfg.wired_class[static_cast<std::size_t>(v)] = t;
        for (std::size_t k = 0; k + 1 < block.size(); ++k) {
            int e = p.edge_between_vertices(block[k], block[k + 1]);
            cfg.frozen[static_cast<std::size_t>(e)] = 1;
            cfg.omega[static_cast<std::size_t>(e)] = 1;
        }
        cfg.wired_members.push_back(std::move(block));
    }
    return cfg;
}

BondConfig fk_config_free(const DiscretePolygon& p, double q, double bond_p) {
    BondConfig cfg = bare_config(p, q, bond_p, "fk_config_free");
    cfg.wiring = Wiring::free_all;
    return cfg;
}

BondConfig fk_config_wired(const DiscretePolygon& p, double q, double bond_p) {
    BondConfig cfg = bare_config(p, q, bond_p, "fk_config_wired");
    cfg.wiring = Wiring::wired_all;
    std::vector<int> rim = p.boundary;
    for (int v : rim) cfg.wired_class[static_cast<std::size_t>(v)] = 0;
    for (std::size_t k = 0; k < rim.size(); ++k) {
        int e = p.edge_between_vertices(rim[k], rim[(k + 1) % rim.size()]);
        cfg.frozen[static_cast<std::size_t>(e)] = 1;
        cfg.omega[static_cast<std::size_t>(e)] = 1;
    }
    cfg.wired_members.push_back(std::move(rim));
    return cfg;
}

bool fk_connected(const BondConfig& cfg, int u, int v, int skip_edge) {
    if (u == v) return true;
    const DiscretePolygon& p = cfg.polygon;
    int cu = cfg.wired_class[static_cast<std::size_t>(u)];
    int cv = cfg.wired_class[static_cast<std::size_t>(v)];
    if (cu >= 0 && cu == cv) return true;

    std::vector<std::uint8_t> seen(static_cast<std::size_t>(p.n_vertices()), 0);
    std::vector<std::uint8_t> block_done(cfg.wired_members.size(), 0);
    std::queue<int> frontier;
    auto visit = [&](int w) {
        if (seen[static_cast<std::size_t>(w)]) return;
        seen[static_cast<std::size_t>(w)] = 1;
        frontier.push(w);
    };
    visit(u);
    while (!frontier.empty()) {
        int w = frontier.front();
        frontier.pop();
        if (w == v) return true;
        int cw = cfg.wired_class[static_cast<std::size_t>(w)];
        if (cw >= 0 && !block_done[static_cast<std::size_t>(cw)]) {
            block_done[static_cast<std::size_t>(cw)] = 1;
            for (int x : cfg.wired_members[static_cast<std::size_t>(cw)]) visit(x);
        }
        auto [i, j] = p.vertex_ij(w);
        auto cross = [&](int e, int other) {
            if (e != skip_edge && cfg.open(e)) visit(other);
        };
        if (i > 0) cross(p.horizontal_edge(i - 1, j), w - 1);
        if (i < p.nx) cross(p.horizontal_edge(i, j), w + 1);
        if (j > 0) cross(p.vertical_edge(i, j - 1), w - (p.nx + 1));
        if (j < p.ny) cross(p.vertical_edge(i, j), w + (p.nx + 1));
    }
    return seen[static_cast<std::size_t>(v)] != 0;
}

void fk_heat_bath(BondConfig& cfg, int sweeps, Rng& rng) {
    if (cfg.dual)
        throw std::invalid_argument("fk_heat_bath: dynamics run on the primal layer");
    if (sweeps < 1)
        throw std::invalid_argument("fk_heat_bath: sweeps must be >= 1");
    double p_joined = cfg.p;
    double p_split = cfg.p / (cfg.p + cfg.q * (1.0 - cfg.p));
    for (int s = 0; s < sweeps; ++s)
        for (int e = 0; e < cfg.polygon.n_edges(); ++e) {
            if (cfg.frozen[static_cast<std::size_t>(e)]) continue;
            auto [u, v] = cfg.polygon.edge_vertices(e);
            double pr = fk_connected(cfg, u, v, e) ? p_joined : p_split;
            cfg.omega[static_cast<std::size_t>(e)] = rng.uniform() < pr ? 1 : 0;
        }
}

BondConfig sample_critical_fk(const DiscretePolygon& p, double q, int sweeps,
                              std::uint64_t seed) {
    BondConfig cfg = fk_config_alternating(p, q);
    Rng rng(seed);
    fk_heat_bath(cfg, sweeps, rng);
    return cfg;
}

namespace {

// union-find over vertex ids, path halving plus union by size
struct Dsu {
    std::vector<int> parent, size;

    explicit Dsu(int n) : parent(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1) {
        for (int v = 0; v < n; ++v) parent[static_cast<std::size_t>(v)] = v;
    }
    int find(int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[static_cast<std::size_t>(a)] < size[static_cast<std::size_t>(b)])
            std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
    }
};

} // namespace

void fk_swendsen_wang(BondConfig& cfg, int moves, Rng& rng) {
    if (cfg.q != 2.0)
        throw std::invalid_argument("fk_swendsen_wang: cluster move needs q = 2");
    if (cfg.dual)
        throw std::invalid_argument("fk_swendsen_wang: dynamics run on the primal layer");
    if (moves < 1)
        throw std::invalid_argument("fk_swendsen_wang: moves must be >= 1");
    const DiscretePolygon& p = cfg.polygon;
    for (int m = 0; m < moves; ++m) {
        Dsu dsu(p.n_vertices());
        for (const auto& block : cfg.wired_members)
            for (std::size_t k = 0; k + 1 < block.size(); ++k)
                dsu.unite(block[k], block[k + 1]);
        for (int e = 0; e < p.n_edges(); ++e)
            if (cfg.open(e)) {
                auto [u, v] = p.edge_vertices(e);
                dsu.unite(u, v);
            }
        // one sign per cluster, drawn in root-discovery order
        std::vector<std::int8_t> sign(static_cast<std::size_t>(p.n_vertices()), 0);
        for (int v = 0; v < p.n_vertices(); ++v) {
            int r = dsu.find(v);
            if (sign[static_cast<std::size_t>(r)] == 0)
                sign[static_cast<std::size_t>(r)] =
                    rng.uniform() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
        }
        for (int e = 0; e < p.n_edges(); ++e) {
            if (cfg.frozen[static_cast<std::size_t>(e)]) continue;
            auto [u, v] = p.edge_vertices(e);
            if (sign[static_cast<std::size_t>(dsu.find(u))] ==
                sign[static_cast<std::size_t>(dsu.find(v))])
                cfg.omega[static_cast<std::size_t>(e)] = rng.uniform() < cfg.p ? 1 : 0;
            else
                cfg.omega[static_cast<std::size_t>(e)] = 0;
        }
    }
}

namespace {

// Strand ports at an edge midpoint, one per quadrant. Bit 0 picks east,
// bit 1 picks south.
constexpr int kNW = 0, kNE = 1, kSW = 2, kSE = 3;

// The strand through a midpoint bounces off the edge when it is open and
// off the crossing dual edge when it is closed, which pairs the quadrants
// across east-west or across north-south.
int partner_quadrant(bool horizontal, bool open_, int quad) {
    return quad ^ ((horizontal == open_) ? 1 : 2);
}

// quadrant of the outer strand segment that rounds rim vertex v, seen from
// the midpoint of rim edge e
int outer_quadrant(const DiscretePolygon& p, int e, int v) {
    auto [vi, vj] = p.vertex_ij(v);
    if (p.edge_is_horizontal(e)) {
        int i = e % p.nx, j = e / p.nx;
        bool west = vi == i;
        if (j == 0) return west ? kSW : kSE;
        return west ? kNW : kNE;
    }
    int r = e - p.nx * (p.ny + 1);
    int i = r % (p.nx + 1), j = r / (p.nx + 1);
    bool south = vj == j;
    if (i == 0) return south ? kSW : kNW;
    return south ? kSE : kNE;
}

} // namespace

FkTrace trace_fk_interfaces(const BondConfig& cfg) {
    if (cfg.dual)
        throw std::invalid_argument("trace_fk_interfaces: primal configurations only");
    const DiscretePolygon& p = cfg.polygon;
    MedialGraph med = medial_graph(p);
    int n_edges = p.n_edges();

    // ports 4e+quad; at_port holds the strand segment attached there
    std::vector<int> at_port(static_cast<std::size_t>(4 * n_edges), -1);
    std::vector<std::array<int, 2>> segment;
    auto add_segment = [&](int pa, int pb) {
        int id = static_cast<int>(segment.size());
        at_port[static_cast<std::size_t>(pa)] = id;
        at_port[static_cast<std::size_t>(pb)] = id;
        segment.push_back({pa, pb});
    };
    auto port = [](int e, int quad) { return 4 * e + quad; };

    for (const auto& ce : med.cell_edges) {
        add_segment(port(ce[0], kNE), port(ce[1], kSW));
        add_segment(port(ce[1], kNW), port(ce[2], kSE));
        add_segment(port(ce[2], kSW), port(ce[3], kNE));
        add_segment(port(ce[3], kSE), port(ce[0], kNW));
    }
    std::size_t nb = p.boundary.size();
    for (std::size_t k = 0; k < nb; ++k) {
        int v = p.boundary[k];
        if (cfg.wired_class[static_cast<std::size_t>(v)] >= 0) continue;
        int prev = p.boundary[(k + nb - 1) % nb];
        int next = p.boundary[(k + 1) % nb];
        int ea = p.edge_between_vertices(prev, v);
        int eb = p.edge_between_vertices(v, next);
        add_segment(port(ea, outer_quadrant(p, ea, v)),
                    port(eb, outer_quadrant(p, eb, v)));
    }

    auto continuation = [&](int at) {
        int e = at / 4;
        return port(e, partner_quadrant(p.edge_is_horizontal(e), cfg.open(e), at % 4));
    };

    // a strand ends wherever a port is occupied but its partner is not;
    // that must happen exactly at the marked medial vertices
    std::vector<int> mark_of(static_cast<std::size_t>(n_edges), -1);
    for (std::size_t k = 0; k < med.marked.size(); ++k)
        mark_of[static_cast<std::size_t>(med.marked[k])] = static_cast<int>(k);
    std::vector<int> stub_at(static_cast<std::size_t>(n_edges), -1);
    for (int e = 0; e < n_edges; ++e)
        for (int quad = 0; quad < 4; ++quad) {
            int pa = port(e, quad);
            if (at_port[static_cast<std::size_t>(pa)] < 0) continue;
            if (at_port[static_cast<std::size_t>(continuation(pa))] >= 0) continue;
            if (mark_of[static_cast<std::size_t>(e)] < 0 ||
                stub_at[static_cast<std::size_t>(e)] >= 0)
                throw TracingError("trace_fk_interfaces: loose strand away from a mark");
            stub_at[static_cast<std::size_t>(e)] = pa;
        }
    if (cfg.wiring == Wiring::alternating) {
        for (int e : med.marked)
            if (stub_at[static_cast<std::size_t>(e)] < 0)
                throw TracingError("trace_fk_interfaces: no strand end at a mark");
    } else {
        for (int s : stub_at)
            if (s >= 0)
                throw TracingError("trace_fk_interfaces: loose strand without wiring arcs");
    }

    FkTrace out;
    out.n_medial_edges = segment.size();
    std::vector<std::uint8_t> used(segment.size(), 0);
    auto take = [&](int seg) {
        if (used[static_cast<std::size_t>(seg)])
            throw TracingError("trace_fk_interfaces: strand segment reused");
        used[static_cast<std::size_t>(seg)] = 1;
    };
    auto far_end = [&](int seg, int from) {
        const auto& ends = segment[static_cast<std::size_t>(seg)];
        return ends[0] == from ? ends[1] : ends[0];
    };

    for (std::size_t k = 0; k < med.marked.size(); ++k) {
        int start = stub_at[static_cast<std::size_t>(med.marked[k])];
        if (start < 0 ||
            used[static_cast<std::size_t>(at_port[static_cast<std::size_t>(start)])])
            continue;
        MedialPath path;
        path.start_mark = static_cast<int>(k);
        path.edges.push_back(start / 4);
        int at = start;
        while (true) {
            int seg = at_port[static_cast<std::size_t>(at)];
            take(seg);
            int arrive = far_end(seg, at);
            path.edges.push_back(arrive / 4);
            int next = continuation(arrive);
            if (at_port[static_cast<std::size_t>(next)] < 0) {
                path.end_mark = mark_of[static_cast<std::size_t>(arrive / 4)];
                break;
            }
            at = next;
        }
        out.interfaces.push_back(std::move(path));
    }

    for (std::size_t s = 0; s < segment.size(); ++s) {
        if (used[s]) continue;
        std::vector<int> cycle;
        int seg = static_cast<int>(s);
        int at = segment[s][0];
        do {
            take(seg);
            int arrive = far_end(seg, at);
            cycle.push_back(arrive / 4);
            at = continuation(arrive);
            seg = at_port[static_cast<std::size_t>(at)];
            if (seg < 0)
                throw TracingError("trace_fk_interfaces: closed strand hit a loose end");
        } while (seg != static_cast<int>(s));
        out.loops.push_back(std::move(cycle));
    }
    return out;
}

BondConfig dual_config(const BondConfig& cfg) {
    BondConfig d = cfg;
    for (auto& bit : d.omega) bit = bit ? 0 : 1;
    d.p = cfg.q * (1.0 - cfg.p) / (cfg.p + cfg.q * (1.0 - cfg.p));
    d.dual = !cfg.dual;
    return d;
}

namespace {

const char* wiring_tag(Wiring w) {
    switch (w) {
        case Wiring::alternating: return "alternating";
        case Wiring::free_all: return "free";
        case Wiring::wired_all: return "wired";
    }
    return "";
}

} // namespace

std::string bonds_to_text(const BondConfig& cfg) {
    const DiscretePolygon& p = cfg.polygon;
    std::ostringstream out;
    out << "fk-bonds 1\n";
    out << std::setprecision(17) << p.ell << ' ' << p.delta << ' ' << p.nx << ' '
        << p.ny << '\n';
    out << p.n_marks();
    for (std::size_t pos : p.marked) out << ' ' << pos;
    out << '\n';
    out << cfg.q << ' ' << cfg.p << ' ' << wiring_tag(cfg.wiring) << ' '
        << (cfg.dual ? 1 : 0) << '\n';
    for (int e = 0; e < p.n_edges(); ++e) out << (cfg.open(e) ? '1' : '0');
    out << '\n';
    return out.str();
}

BondConfig bonds_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (!in || tag != "fk-bonds" || version != 1)
        throw std::invalid_argument("bonds_from_text: not an fk-bonds dump");
    double ell = 0, delta = 0;
    int nx = 0, ny = 0, n_marks = 0;
    in >> ell >> delta >> nx >> ny >> n_marks;
    if (!in || n_marks < 2)
        throw std::invalid_argument("bonds_from_text: malformed header");
    std::vector<std::size_t> positions(static_cast<std::size_t>(n_marks));
    for (auto& pos : positions) in >> pos;
    double q = 0, bond_p = 0;
    std::string wiring;
    int dual = 0;
    in >> q >> bond_p >> wiring >> dual;
    std::string bits;
    in >> bits;
    if (!in || (dual != 0 && dual != 1))
        throw std::invalid_argument("bonds_from_text: malformed parameter line");

    std::size_t cycle = 2 * static_cast<std::size_t>(nx + ny);
    std::vector<double> fractions;
    fractions.reserve(positions.size());
    for (std::size_t pos : positions)
        fractions.push_back(static_cast<double>(pos) / static_cast<double>(cycle));
    DiscretePolygon poly = build_rectangle(ell, delta, fractions);
    if (poly.nx != nx || poly.ny != ny || poly.marked != positions)
        throw std::invalid_argument("bonds_from_text: header does not fit the grid");

    BondConfig cfg;
    if (wiring == "alternating")
        cfg = fk_config_alternating(poly, q, 0.5);
    else if (wiring == "free")
        cfg = fk_config_free(poly, q, 0.5);
    else if (wiring == "wired")
        cfg = fk_config_wired(poly, q, 0.5);
    else
        throw std::invalid_argument("bonds_from_text: unknown wiring tag");
    cfg.p = bond_p;
    if (!(bond_p > 0.0 && bond_p < 1.0))
        throw std::invalid_argument("bonds_from_text: p must lie in (0,1)");
    cfg.dual = dual == 1;

    if (bits.size() != static_cast<std::size_t>(poly.n_edges()))
        throw std::invalid_argument("bonds_from_text: wrong occupation length");
    for (std::size_t e = 0; e < bits.size(); ++e) {
        if (bits[e] != '0' && bits[e] != '1')
            throw std::invalid_argument("bonds_from_text: bad occupation character");
        std::uint8_t bit = bits[e] == '1' ? 1 : 0;
        std::uint8_t pinned = cfg.dual ? 0 : 1;
        if (cfg.frozen[e] && bit != pinned)
            throw std::invalid_argument("bonds_from_text: frozen bond has the wrong state");
        cfg.omega[e] = bit;
    }
    return cfg;
}

} // namespace msle
