#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace msle {

// Planar pair partition of {1, ..., 2N}. Links are stored with a < b and
// sorted by their first leg, which is the canonical form used everywhere
// (ordering, equality, text encoding).
struct LinkPattern {
    std::vector<std::pair<int, int>> links;

    int n_links() const { return static_cast<int>(links.size()); }
    int n_points() const { return 2 * n_links(); }

    // index (0-based) of the link containing point p (1-based), -1 if absent
    int link_of(int p) const;
    // partner of point p
    int partner(int p) const;
    bool contains(int a, int b) const;

    bool operator==(const LinkPattern&) const = default;
    bool operator<(const LinkPattern& o) const { return links < o.links; }
};

std::uint64_t catalan(int n);

// all planar pair partitions of {1,...,2N} in lexicographic order of their
// canonical link lists; N up to 12
std::vector<LinkPattern> enumerate_patterns(int n);

// validates and canonicalizes a pairing; throws NonPlanarError if the pairs
// do not form a planar pair partition of {1,...,2N}
LinkPattern pattern_of_matching(const std::vector<std::pair<int, int>>& pairs);

// removes the link {a,b} (which must be present) and relabels the remaining
// points 1..2N-2 preserving order
LinkPattern remove_link(const LinkPattern& alpha, int a, int b);

// text form "N;a1-b1,a2-b2,..." with links in canonical order
std::string to_string(const LinkPattern& alpha);
LinkPattern parse_pattern(const std::string& text);

} // namespace msle
