#include "msle/combinatorics.hpp"

#include "msle/errors.hpp"

#include <algorithm>
#include <sstream>

namespace msle {

int LinkPattern::link_of(int p) const {
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].first == p || links[i].second == p) return static_cast<int>(i);
    return -1;
}

int LinkPattern::partner(int p) const {
    int i = link_of(p);
    if (i < 0) throw std::invalid_argument("LinkPattern::partner: point not present");
    return links[i].first == p ? links[i].second : links[i].first;
}

bool LinkPattern::contains(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::find(links.begin(), links.end(), std::make_pair(a, b)) != links.end();
}

std::uint64_t catalan(int n) {
    if (n < 0) throw std::invalid_argument("catalan: negative index");
    std::uint64_t c = 1;
    for (int i = 0; i < n; ++i) {
        // C_{i+1} = C_i * 2(2i+1)/(i+2), exact in integers
        c = c * 2 * (2 * static_cast<std::uint64_t>(i) + 1) / (static_cast<std::uint64_t>(i) + 2);
    }
    return c;
}

namespace {

using Links = std::vector<std::pair<int, int>>;

// Matches the first free point with a partner at odd relative position and
// recurses on the enclosed and remaining points separately, so crossings
// cannot arise by construction.
std::vector<Links> enumerate_split(const std::vector<int>& pts) {
    if (pts.empty()) return {Links{}};
    std::vector<Links> out;
    int a = pts.front();
    for (std::size_t j = 1; j < pts.size(); j += 2) {
        int b = pts[j];
        std::vector<int> inside(pts.begin() + 1, pts.begin() + static_cast<long>(j));
        std::vector<int> rest(pts.begin() + static_cast<long>(j) + 1, pts.end());
        for (const Links& in : enumerate_split(inside))
            for (const Links& re : enumerate_split(rest)) {
                Links ls;
                ls.reserve(1 + in.size() + re.size());
                ls.emplace_back(a, b);
                ls.insert(ls.end(), in.begin(), in.end());
                ls.insert(ls.end(), re.begin(), re.end());
                out.push_back(std::move(ls));
            }
    }
    return out;
}

} // namespace

std::vector<LinkPattern> enumerate_patterns(int n) {
    if (n < 1 || n > 12) throw std::invalid_argument("enumerate_patterns: need 1 <= N <= 12");
    std::vector<int> pts(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < 2 * n; ++i) pts[static_cast<std::size_t>(i)] = i + 1;
    std::vector<LinkPattern> out;
    out.reserve(catalan(n));
    for (Links& ls : enumerate_split(pts)) {
        std::sort(ls.begin(), ls.end());
        out.push_back(LinkPattern{std::move(ls)});
    }
    std::sort(out.begin(), out.end());
    return out;
}

LinkPattern pattern_of_matching(const std::vector<std::pair<int, int>>& pairs) {
    int n = static_cast<int>(pairs.size());
    if (n < 1) throw NonPlanarError("pattern_of_matching: empty pairing");
    std::vector<std::pair<int, int>> ls(pairs);
    std::vector<bool> seen(2 * n + 1, false);
    for (auto& [a, b] : ls) {
        if (a > b) std::swap(a, b);
        if (a < 1 || b > 2 * n || a == b)
            throw NonPlanarError("pattern_of_matching: indices out of range");
        if (seen[a] || seen[b]) throw NonPlanarError("pattern_of_matching: repeated point");
        seen[a] = seen[b] = true;
    }
    for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = i + 1; j < ls.size(); ++j) {
            auto [a1, b1] = ls[i];
            auto [a2, b2] = ls[j];
            if (a2 < a1) {
                std::swap(a1, a2);
                std::swap(b1, b2);
            }
            if (a1 < a2 && a2 < b1 && b1 < b2)
                throw NonPlanarError("pattern_of_matching: links cross");
        }
    std::sort(ls.begin(), ls.end());
    return LinkPattern{ls};
}

LinkPattern remove_link(const LinkPattern& alpha, int a, int b) {
    if (a > b) std::swap(a, b);
    if (!alpha.contains(a, b))
        throw std::invalid_argument("remove_link: {a,b} is not a link of the pattern");
    std::vector<std::pair<int, int>> ls;
    for (auto [p, q] : alpha.links) {
        if (p == a && q == b) continue;
        auto shift = [&](int v) { return v - (v > a) - (v > b); };
        ls.emplace_back(shift(p), shift(q));
    }
    std::sort(ls.begin(), ls.end());
    return LinkPattern{ls};
}

std::string to_string(const LinkPattern& alpha) {
    std::ostringstream os;
    os << alpha.n_links() << ';';
    for (std::size_t i = 0; i < alpha.links.size(); ++i) {
        if (i) os << ',';
        os << alpha.links[i].first << '-' << alpha.links[i].second;
    }
    return os.str();
}

LinkPattern parse_pattern(const std::string& text) {
    std::istringstream is(text);
    int n = 0;
    char sep = 0;
    if (!(is >> n >> sep) || sep != ';')
        throw std::invalid_argument("parse_pattern: expected \"N;a1-b1,...\"");
    std::vector<std::pair<int, int>> ls;
    for (int i = 0; i < n; ++i) {
        int a = 0, b = 0;
        char dash = 0;
        if (!(is >> a >> dash >> b) || dash != '-')
            throw std::invalid_argument("parse_pattern: malformed link");
        ls.emplace_back(a, b);
        if (i + 1 < n) {
            if (!(is >> sep) || sep != ',')
                throw std::invalid_argument("parse_pattern: missing comma");
        }
    }
    char trailing = 0;
    if (is >> trailing) throw std::invalid_argument("parse_pattern: trailing characters");
    LinkPattern p = pattern_of_matching(ls);
    return p;
}

} // namespace msle
