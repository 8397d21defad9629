#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "msle/combinatorics.hpp"
#include "msle/errors.hpp"

#include <algorithm>
#include <set>

using namespace msle;

namespace {

// independent oracle: enumerate every pairing of {1..2N} and keep the
// non-crossing ones
void all_pairings(std::vector<int>& pts, std::vector<std::pair<int, int>>& acc,
                  std::vector<std::vector<std::pair<int, int>>>& out) {
    if (pts.empty()) {
        out.push_back(acc);
        return;
    }
    int a = pts.front();
    for (std::size_t j = 1; j < pts.size(); ++j) {
        int b = pts[j];
        std::vector<int> rest;
        for (std::size_t k = 1; k < pts.size(); ++k)
            if (k != j) rest.push_back(pts[k]);
        acc.emplace_back(a, b);
        all_pairings(rest, acc, out);
        acc.pop_back();
    }
}

bool crossing_free(const std::vector<std::pair<int, int>>& ls) {
    for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = 0; j < ls.size(); ++j) {
            if (i == j) continue;
            auto [a1, b1] = ls[i];
            auto [a2, b2] = ls[j];
            if (a1 < a2 && a2 < b1 && b1 < b2) return false;
        }
    return true;
}

std::set<std::vector<std::pair<int, int>>> oracle_patterns(int n) {
    std::vector<int> pts;
    for (int i = 1; i <= 2 * n; ++i) pts.push_back(i);
    std::vector<std::pair<int, int>> acc;
    std::vector<std::vector<std::pair<int, int>>> all;
    all_pairings(pts, acc, all);
    std::set<std::vector<std::pair<int, int>>> keep;
    for (auto ls : all) {
        if (!crossing_free(ls)) continue;
        std::sort(ls.begin(), ls.end());
        keep.insert(ls);
    }
    return keep;
}

} // namespace

TEST_CASE("catalan numbers") {
    CHECK(catalan(0) == 1);
    CHECK(catalan(1) == 1);
    CHECK(catalan(2) == 2);
    CHECK(catalan(3) == 5);
    CHECK(catalan(4) == 14);
    CHECK(catalan(5) == 42);
    CHECK(catalan(12) == 208012);
}

TEST_CASE("enumerate_patterns matches brute-force oracle for N <= 5") {
    for (int n = 1; n <= 5; ++n) {
        auto pats = enumerate_patterns(n);
        auto oracle = oracle_patterns(n);
        REQUIRE(pats.size() == oracle.size());
        CHECK(pats.size() == catalan(n));
        for (const auto& p : pats) CHECK(oracle.count(p.links) == 1);
        // lexicographic, no duplicates
        CHECK(std::is_sorted(pats.begin(), pats.end()));
        CHECK(std::adjacent_find(pats.begin(), pats.end()) == pats.end());
    }
}

TEST_CASE("enumerate_patterns counts up to N = 12") {
    CHECK(enumerate_patterns(8).size() == 1430);
    CHECK(enumerate_patterns(12).size() == 208012);
    CHECK_THROWS_AS(enumerate_patterns(0), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_patterns(13), std::invalid_argument);
}

TEST_CASE("every link joins points of opposite parity") {
    for (const auto& p : enumerate_patterns(6))
        for (auto [a, b] : p.links) CHECK((b - a) % 2 == 1);
}

TEST_CASE("pattern_of_matching validates") {
    auto p = pattern_of_matching({{3, 2}, {1, 4}});
    CHECK(p.links == std::vector<std::pair<int, int>>{{1, 4}, {2, 3}});

    CHECK_THROWS_AS(pattern_of_matching({{1, 3}, {2, 4}}), NonPlanarError);
    CHECK_THROWS_AS(pattern_of_matching({{1, 2}, {2, 3}}), NonPlanarError);
    CHECK_THROWS_AS(pattern_of_matching({{1, 2}, {3, 5}}), NonPlanarError);
    CHECK_THROWS_AS(pattern_of_matching({{0, 1}, {2, 3}}), NonPlanarError);
}

TEST_CASE("remove_link relabels") {
    // {{1,2},{3,6},{4,5}} minus {3,6} leaves {{1,2},{3,4}}
    LinkPattern p = pattern_of_matching({{1, 2}, {3, 6}, {4, 5}});
    LinkPattern q = remove_link(p, 3, 6);
    CHECK(q.links == std::vector<std::pair<int, int>>{{1, 2}, {3, 4}});

    // removing an inner link: {{1,6},{2,3},{4,5}} minus {2,3} -> {{1,4},{2,3}}
    LinkPattern r = remove_link(pattern_of_matching({{1, 6}, {2, 3}, {4, 5}}), 2, 3);
    CHECK(r.links == std::vector<std::pair<int, int>>{{1, 4}, {2, 3}});

    CHECK_THROWS_AS(remove_link(p, 1, 3), std::invalid_argument);
}

TEST_CASE("removal always yields a valid smaller pattern") {
    for (const auto& p : enumerate_patterns(5))
        for (auto [a, b] : p.links) {
            LinkPattern q = remove_link(p, a, b);
            CHECK(q.n_links() == 4);
            CHECK_NOTHROW(pattern_of_matching(q.links));
        }
}

TEST_CASE("text round trip") {
    for (const auto& p : enumerate_patterns(4)) {
        CHECK(parse_pattern(to_string(p)) == p);
    }
    CHECK(to_string(pattern_of_matching({{1, 4}, {2, 3}})) == "2;1-4,2-3");
    CHECK_THROWS_AS(parse_pattern("2;1-3,2-4"), NonPlanarError);
    CHECK_THROWS_AS(parse_pattern("junk"), std::invalid_argument);
    CHECK_THROWS_AS(parse_pattern("2;1-4,2-3,"), std::invalid_argument);
}

TEST_CASE("partner lookup") {
    LinkPattern p = pattern_of_matching({{1, 6}, {2, 3}, {4, 5}});
    CHECK(p.partner(1) == 6);
    CHECK(p.partner(3) == 2);
    CHECK(p.partner(5) == 4);
    CHECK(p.link_of(7) == -1);
}
