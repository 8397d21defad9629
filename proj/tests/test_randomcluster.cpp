#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "msle/errors.hpp"
#include "msle/randomcluster.hpp"
#include "msle/random.hpp"
#include "msle/stats.hpp"

using namespace msle;

namespace {

// tiny union-find for the enumeration and duality checks
struct MiniDsu {
    std::vector<int> parent;

    explicit MiniDsu(int n) : parent(static_cast<std::size_t>(n)) {
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
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
    int components() {
        int c = 0;
        for (int v = 0; v < static_cast<int>(parent.size()); ++v)
            if (find(v) == v) ++c;
        return c;
    }
};

// open path between two interior vertices using interior edges only
bool interior_connection(const BondConfig& cfg, int a, int b) {
    const DiscretePolygon& p = cfg.polygon;
    auto interior = [&](int v) {
        auto [i, j] = p.vertex_ij(v);
        return i > 0 && i < p.nx && j > 0 && j < p.ny;
    };
    std::vector<int> stack{a};
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(p.n_vertices()), 0);
    seen[static_cast<std::size_t>(a)] = 1;
    while (!stack.empty()) {
        int w = stack.back();
        stack.pop_back();
        if (w == b) return true;
        auto [i, j] = p.vertex_ij(w);
        auto step = [&](int e, int other) {
            if (cfg.open(e) && interior(other) && !seen[static_cast<std::size_t>(other)]) {
                seen[static_cast<std::size_t>(other)] = 1;
                stack.push_back(other);
            }
        };
        if (i > 0) step(p.horizontal_edge(i - 1, j), w - 1);
        if (i < p.nx) step(p.horizontal_edge(i, j), w + 1);
        if (j > 0) step(p.vertical_edge(i, j - 1), w - (p.nx + 1));
        if (j < p.ny) step(p.vertical_edge(i, j), w + (p.nx + 1));
    }
    return false;
}

std::size_t strands_used(const FkTrace& trace) {
    std::size_t used = 0;
    for (const auto& path : trace.interfaces) used += path.edges.size() - 1;
    for (const auto& loop : trace.loops) used += loop.size();
    return used;
}

} // namespace

TEST_CASE("critical point and interface diffusivity pin the known values") {
    CHECK(fk_p_critical(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fk_p_critical(2.0) ==
          doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-15));
    CHECK(fk_interface_kappa(1.0) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(fk_interface_kappa(2.0) == doctest::Approx(16.0 / 3.0).epsilon(1e-13));
    CHECK(fk_interface_kappa(3.0) == doctest::Approx(4.8).epsilon(1e-13));
    // the diffusivity decreases toward 4 as q approaches 4
    CHECK(fk_interface_kappa(3.9999) > 4.0);
    CHECK(fk_interface_kappa(3.9999) < 4.01);
}

TEST_CASE("alternating wiring freezes the wired arcs and nothing else") {
    DiscretePolygon p = build_rectangle(1.0, 0.5, {1.0 / 8, 5.0 / 8});
    BondConfig cfg = fk_config_alternating(p, 2.0);
    CHECK(cfg.p == doctest::Approx(fk_p_critical(2.0)).epsilon(1e-15));

    // the wired block owns the arc from mark (1,0) to mark (1,2) minus its
    // first vertex
    std::set<int> wired{p.vertex_id(2, 0), p.vertex_id(2, 1), p.vertex_id(2, 2),
                        p.vertex_id(1, 2)};
    for (int v = 0; v < p.n_vertices(); ++v)
        CHECK(cfg.wired_class[v] == (wired.count(v) ? 0 : -1));
    REQUIRE(cfg.wired_members.size() == 1);
    CHECK(cfg.wired_members[0].size() == 4);

    std::set<int> frozen{p.vertical_edge(2, 0), p.vertical_edge(2, 1),
                         p.horizontal_edge(1, 2)};
    for (int e = 0; e < p.n_edges(); ++e) {
        CHECK(cfg.frozen[e] == (frozen.count(e) ? 1 : 0));
        CHECK(cfg.open(e) == (frozen.count(e) != 0));
    }

    // quotient connectivity: the block is one vertex, everything else is cut
    CHECK(fk_connected(cfg, p.vertex_id(2, 0), p.vertex_id(1, 2)));
    CHECK_FALSE(fk_connected(cfg, p.vertex_id(1, 0), p.vertex_id(2, 0)));
    int lead = p.horizontal_edge(1, 0);
    cfg.omega[lead] = 1;
    CHECK(fk_connected(cfg, p.vertex_id(1, 0), p.vertex_id(2, 2)));
    CHECK_FALSE(fk_connected(cfg, p.vertex_id(1, 0), p.vertex_id(2, 2), lead));
}

TEST_CASE("q = 1 bonds are independent fair coins at the self-dual point") {
    DiscretePolygon p = build_rectangle(1.0, 1.0 / 6, {0.0, 0.5});
    BondConfig cfg = fk_config_alternating(p, 1.0);
    Rng rng(mix_seed(3030, 0));

    std::vector<int> random_edges;
    for (int e = 0; e < p.n_edges(); ++e)
        if (!cfg.frozen[e]) random_edges.push_back(e);

    const int n_sweeps = 800;
    std::vector<double> edge_mean(5, 0.0);
    double total = 0.0;
    for (int s = 0; s < n_sweeps; ++s) {
        fk_heat_bath(cfg, 1, rng);
        for (std::size_t k = 0; k < edge_mean.size(); ++k)
            edge_mean[k] += cfg.open(random_edges[k * 7]);
        for (int e : random_edges) total += cfg.open(e);
    }
    // at q = 1 both heat-bath branches open with probability p, so every
    // sweep redraws each bond as an independent coin
    double sigma_edge = 0.5 / std::sqrt(static_cast<double>(n_sweeps));
    for (double& m : edge_mean) {
        m /= n_sweeps;
        CHECK(std::abs(m - 0.5) < 3.0 * sigma_edge);
    }
    double n_coins = static_cast<double>(n_sweeps) *
                     static_cast<double>(random_edges.size());
    CHECK(std::abs(total / n_coins - 0.5) < 3.0 * 0.5 / std::sqrt(n_coins));
}

TEST_CASE("q = 2 free-boundary marginals match exact enumeration on 2x3") {
    DiscretePolygon p = build_rectangle(2.0 / 3, 1.0 / 3, {0.0, 0.5});
    REQUIRE(p.nx == 2);
    REQUIRE(p.ny == 3);
    const int n_edges = p.n_edges();
    REQUIRE(n_edges == 17);
    const double q = 2.0, pc = fk_p_critical(q);

    // exact marginals: weight p^o (1-p)^c q^k over all bond states, with k
    // counting every component of the vertex set, singletons included
    std::vector<double> exact(n_edges, 0.0);
    double z = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n_edges); ++mask) {
        MiniDsu dsu(p.n_vertices());
        int open_count = 0;
        for (int e = 0; e < n_edges; ++e)
            if (mask & (1u << e)) {
                ++open_count;
                auto [u, v] = p.edge_vertices(e);
                dsu.unite(u, v);
            }
        double w = std::pow(pc, open_count) *
                   std::pow(1.0 - pc, n_edges - open_count) *
                   std::pow(q, dsu.components());
        z += w;
        for (int e = 0; e < n_edges; ++e)
            if (mask & (1u << e)) exact[e] += w;
    }
    for (double& m : exact) m /= z;

    BondConfig cfg = fk_config_free(p, q);
    Rng rng(mix_seed(4040, 0));
    fk_heat_bath(cfg, 2000, rng);
    const int n_rec = 100000;
    std::vector<std::vector<double>> series(
        static_cast<std::size_t>(n_edges), std::vector<double>());
    for (auto& s : series) s.reserve(n_rec);
    for (int s = 0; s < n_rec; ++s) {
        fk_heat_bath(cfg, 1, rng);
        for (int e = 0; e < n_edges; ++e)
            series[e].push_back(cfg.open(e) ? 1.0 : 0.0);
    }
    for (int e = 0; e < n_edges; ++e) {
        double mean = 0.0;
        for (double x : series[e]) mean += x;
        mean /= n_rec;
        double se = batch_stderr(series[e], 50);
        INFO("edge ", e, " sampled ", mean, " exact ", exact[e], " se ", se);
        CHECK(std::abs(mean - exact[e]) <= 3.0 * se);
    }
}

TEST_CASE("wired boundary dominates free boundary for an interior connection") {
    DiscretePolygon p = build_rectangle(1.0, 1.0 / 6, {0.0, 0.5});
    int a = p.vertex_id(2, 3), b = p.vertex_id(4, 3);

    auto estimate = [&](BondConfig cfg, std::uint64_t seed, double& se) {
        Rng rng(seed);
        fk_heat_bath(cfg, 300, rng);
        const int n_samples = 1200;
        double hits = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            fk_heat_bath(cfg, 3, rng);
            hits += interior_connection(cfg, a, b);
        }
        double phat = hits / n_samples;
        se = std::sqrt(phat * (1.0 - phat) / n_samples);
        return phat;
    };

    double se_w = 0.0, se_f = 0.0;
    double p_wired = estimate(fk_config_wired(p, 2.0), mix_seed(5050, 1), se_w);
    double p_free = estimate(fk_config_free(p, 2.0), mix_seed(5050, 2), se_f);
    INFO("wired ", p_wired, " free ", p_free);
    CHECK(p_wired >= p_free - 3.0 * std::sqrt(se_w * se_w + se_f * se_f));

    // the wired rim is a single quotient vertex even with every bond closed
    BondConfig wired = fk_config_wired(p, 2.0);
    CHECK(fk_connected(wired, p.vertex_id(0, 0), p.vertex_id(6, 6)));
}

TEST_CASE("empty Dobrushin configuration yields the arc-hugging interface") {
    DiscretePolygon p = build_rectangle(1.0, 0.5, {1.0 / 8, 5.0 / 8});
    BondConfig cfg = fk_config_alternating(p, 2.0);
    FkTrace trace = trace_fk_interfaces(cfg);

    // every bond closed: the lone interface runs along the dual side of the
    // wired arc from mark (1,0) to mark (1,2)
    REQUIRE(trace.interfaces.size() == 1);
    const MedialPath& path = trace.interfaces[0];
    CHECK(path.start_mark == 0);
    CHECK(path.end_mark == 1);
    std::vector<int> expected{p.horizontal_edge(1, 0), p.vertical_edge(2, 0),
                              p.horizontal_edge(1, 1), p.vertical_edge(2, 1),
                              p.horizontal_edge(1, 2), p.vertical_edge(1, 1),
                              p.horizontal_edge(0, 2)};
    CHECK(path.edges == expected);
    CHECK(classify_pattern(trace.interfaces) == parse_pattern("1;1-2"));

    // the free side decomposes into small loops pinched against the rim
    REQUIRE(trace.loops.size() == 5);
    std::vector<std::size_t> lens;
    for (const auto& loop : trace.loops) lens.push_back(loop.size());
    std::sort(lens.begin(), lens.end());
    CHECK(lens == std::vector<std::size_t>{2, 2, 3, 3, 4});

    // 16 diamond sides plus one outer segment per free rim vertex
    CHECK(trace.n_medial_edges == 20);
    CHECK(strands_used(trace) == trace.n_medial_edges);
}

TEST_CASE("a single open edge is encircled by one loop") {
    DiscretePolygon p = build_rectangle(1.0, 1.0 / 3, {1.0 / 12, 7.0 / 12});
    BondConfig cfg = fk_config_alternating(p, 2.0);
    int bond = p.horizontal_edge(1, 1);
    cfg.omega[bond] = 1;

    FkTrace trace = trace_fk_interfaces(cfg);
    REQUIRE(trace.interfaces.size() == 1);
    CHECK(strands_used(trace) == trace.n_medial_edges);

    int loops_through = 0, visits = 0;
    for (const auto& loop : trace.loops) {
        int c = static_cast<int>(std::count(loop.begin(), loop.end(), bond));
        if (c > 0) ++loops_through;
        visits += c;
    }
    CHECK(loops_through == 1);
    CHECK(visits == 2);
    for (const auto& path : trace.interfaces)
        CHECK(std::count(path.edges.begin(), path.edges.end(), bond) == 0);
}

TEST_CASE("traces partition the strands and classify planar patterns") {
    DiscretePolygon p = build_rectangle(1.0, 0.2, {0.05, 0.3, 0.55, 0.8});
    MedialGraph med = medial_graph(p);
    LinkPattern rainbow = parse_pattern("2;1-4,2-3");
    LinkPattern nested = parse_pattern("2;1-2,3-4");

    int idx = 0;
    for (double q : {1.0, 2.0, 3.5}) {
        std::set<std::string> seen;
        for (int k = 0; k < 80; ++k) {
            BondConfig cfg = sample_critical_fk(p, q, 40, mix_seed(7777, idx++));
            FkTrace trace = trace_fk_interfaces(cfg);
            REQUIRE(trace.interfaces.size() == 2);
            CHECK(strands_used(trace) == trace.n_medial_edges);

            std::set<int> ends;
            for (const MedialPath& path : trace.interfaces) {
                ends.insert(path.start_mark);
                ends.insert(path.end_mark);
                CHECK(path.edges.front() == med.marked[path.start_mark]);
                CHECK(path.edges.back() == med.marked[path.end_mark]);
            }
            CHECK(ends == std::set<int>{0, 1, 2, 3});

            LinkPattern pat = classify_pattern(trace.interfaces);
            CHECK((pat == rainbow || pat == nested));
            seen.insert(to_string(pat));
        }
        // both planar pairings occur at every q on a roughly square domain
        CHECK(seen.size() == 2);
    }
}

TEST_CASE("duality flips occupation and is an involution") {
    DiscretePolygon p = build_rectangle(1.0, 0.25, {0.0, 0.5});
    BondConfig cfg = sample_critical_fk(p, 2.0, 60, 912);

    BondConfig d = dual_config(cfg);
    CHECK(d.dual);
    CHECK(d.q == cfg.q);
    CHECK(d.p == doctest::Approx(cfg.p).epsilon(1e-14)); // self-dual point
    for (int e = 0; e < p.n_edges(); ++e) CHECK(d.open(e) == !cfg.open(e));

    BondConfig dd = dual_config(d);
    CHECK_FALSE(dd.dual);
    CHECK(dd.omega == cfg.omega);
    CHECK(dd.p == doctest::Approx(cfg.p).epsilon(1e-14));
    CHECK(dd.frozen == cfg.frozen);

    // away from the self-dual point p maps through pp*/( (1-p)(1-p*) ) = q
    BondConfig off = fk_config_free(p, 2.0, 0.3);
    BondConfig off_dual = dual_config(off);
    CHECK(off_dual.p == doctest::Approx(1.4 / 1.7).epsilon(1e-15));
    CHECK(dual_config(off_dual).p == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("left-right openings and top-bottom dual crossings tile the square") {
    DiscretePolygon p = build_rectangle(1.0, 0.5, {0.0, 0.5});
    BondConfig cfg = fk_config_free(p, 2.0);
    REQUIRE(p.n_edges() == 12);

    auto primal_lr = [&]() {
        MiniDsu dsu(p.n_vertices());
        for (int e = 0; e < p.n_edges(); ++e)
            if (cfg.open(e)) {
                auto [u, v] = p.edge_vertices(e);
                dsu.unite(u, v);
            }
        for (int ja = 0; ja <= p.ny; ++ja)
            for (int jb = 0; jb <= p.ny; ++jb)
                if (dsu.find(p.vertex_id(0, ja)) == dsu.find(p.vertex_id(p.nx, jb)))
                    return true;
        return false;
    };
    // dual nodes: the four cells plus a top and a bottom ghost, joined
    // through closed bonds
    auto dual_tb = [&]() {
        const int top = 4, bottom = 5;
        MiniDsu dsu(6);
        for (int i = 0; i < p.nx; ++i) {
            if (!cfg.open(p.horizontal_edge(i, 0))) dsu.unite(bottom, i);
            if (!cfg.open(p.horizontal_edge(i, 1))) dsu.unite(i, 2 + i);
            if (!cfg.open(p.horizontal_edge(i, 2))) dsu.unite(2 + i, top);
        }
        for (int j = 0; j < p.ny; ++j)
            if (!cfg.open(p.vertical_edge(1, j))) dsu.unite(2 * j, 2 * j + 1);
        return dsu.find(top) == dsu.find(bottom);
    };

    for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
        for (int e = 0; e < 12; ++e) cfg.omega[e] = (mask >> e) & 1u;
        CHECK(primal_lr() != dual_tb());
    }
}

TEST_CASE("cluster moves agree with the single-bond dynamics at q = 2") {
    DiscretePolygon p = build_rectangle(1.0, 0.25, {0.0, 0.5});
    BondConfig hb = fk_config_alternating(p, 2.0);
    BondConfig sw = hb;

    std::vector<int> random_edges;
    for (int e = 0; e < p.n_edges(); ++e)
        if (!hb.frozen[e]) random_edges.push_back(e);
    auto open_count = [&](const BondConfig& cfg) {
        double c = 0.0;
        for (int e : random_edges) c += cfg.open(e);
        return c;
    };

    Rng rng_hb(mix_seed(8811, 0));
    fk_heat_bath(hb, 400, rng_hb);
    std::vector<double> a;
    for (int s = 0; s < 700; ++s) {
        fk_heat_bath(hb, 3, rng_hb);
        a.push_back(open_count(hb));
    }
    Rng rng_sw(mix_seed(8811, 1));
    fk_swendsen_wang(sw, 200, rng_sw);
    std::vector<double> b;
    for (int s = 0; s < 700; ++s) {
        fk_swendsen_wang(sw, 2, rng_sw);
        b.push_back(open_count(sw));
    }
    KsResult ks = ks_two_sample(a, b, 0.01);
    INFO("ks statistic ", ks.statistic, " p ", ks.p_value);
    CHECK_FALSE(ks.reject);
}

TEST_CASE("sampling is reproducible from the seed") {
    DiscretePolygon p = build_rectangle(1.0, 0.2, {0.1, 0.6});
    BondConfig one = sample_critical_fk(p, 2.0, 30, 999);
    BondConfig two = sample_critical_fk(p, 2.0, 30, 999);
    CHECK(one.omega == two.omega);
    BondConfig other = sample_critical_fk(p, 2.0, 30, 1000);
    CHECK(one.omega != other.omega);
}

TEST_CASE("bond dumps round trip and reject malformed input") {
    DiscretePolygon p = build_rectangle(1.0, 0.2, {0.05, 0.3, 0.55, 0.8});
    BondConfig cfg = sample_critical_fk(p, 2.0, 50, 321);

    std::string text = bonds_to_text(cfg);
    BondConfig back = bonds_from_text(text);
    CHECK(back.omega == cfg.omega);
    CHECK(back.frozen == cfg.frozen);
    CHECK(back.wired_class == cfg.wired_class);
    CHECK(back.q == cfg.q);
    CHECK(back.p == cfg.p);
    CHECK(back.wiring == cfg.wiring);
    CHECK(back.dual == cfg.dual);
    CHECK(back.polygon.nx == p.nx);
    CHECK(back.polygon.marked == p.marked);

    BondConfig d = dual_config(cfg);
    BondConfig d_back = bonds_from_text(bonds_to_text(d));
    CHECK(d_back.dual);
    CHECK(d_back.omega == d.omega);
    CHECK(d_back.p == d.p);

    CHECK_THROWS_AS(bonds_from_text("spin-soup 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(bonds_from_text(text.substr(0, text.size() / 2)),
                    std::invalid_argument);

    // flipping a frozen bond in the bitmap must be caught on load
    int ef = -1;
    for (int e = 0; e < p.n_edges(); ++e)
        if (cfg.frozen[e]) ef = e;
    REQUIRE(ef >= 0);
    std::size_t bits_at = text.rfind('\n', text.size() - 2) + 1;
    std::string bad = text;
    bad[bits_at + static_cast<std::size_t>(ef)] = '0';
    CHECK_THROWS_AS(bonds_from_text(bad), std::invalid_argument);

    std::string odd_tag = text;
    std::size_t at = odd_tag.find("alternating");
    odd_tag.replace(at, std::string("alternating").size(), "scrambled");
    CHECK_THROWS_AS(bonds_from_text(odd_tag), std::invalid_argument);
}

TEST_CASE("parameter domains are enforced") {
    DiscretePolygon p = build_rectangle(1.0, 0.5, {0.0, 0.5});
    CHECK_THROWS_AS(fk_p_critical(0.99), std::invalid_argument);
    CHECK_THROWS_AS(fk_p_critical(4.0), std::invalid_argument);
    CHECK_THROWS_AS(fk_interface_kappa(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(fk_config_alternating(p, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(fk_config_free(p, 1.5, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(sample_critical_fk(p, 0.5, 10, 1), std::invalid_argument);

    BondConfig cfg = fk_config_alternating(p, 3.0);
    Rng rng(7);
    CHECK_THROWS_AS(fk_heat_bath(cfg, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(fk_swendsen_wang(cfg, 10, rng), std::invalid_argument);

    BondConfig d = dual_config(cfg);
    CHECK_THROWS_AS(fk_heat_bath(d, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(trace_fk_interfaces(d), std::invalid_argument);
    BondConfig two = fk_config_alternating(p, 2.0);
    CHECK_THROWS_AS(fk_swendsen_wang(two, 0, rng), std::invalid_argument);
}
