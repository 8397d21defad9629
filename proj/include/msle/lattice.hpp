#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "msle/combinatorics.hpp"

namespace msle {

using cplx = std::complex<double>;

// Grid approximation of the rectangle [0, ell] x [0, 1] with mesh delta and
// 2N marked boundary vertices. Vertices are lattice points (i, j) with
// 0 <= i <= nx, 0 <= j <= ny; all nx * ny cells are filled.
//
// Edge ids enumerate horizontal edges first: h(i,j) = j*nx + i joins (i,j)
// to (i+1,j); v(i,j) = nx*(ny+1) + j*(nx+1) + i joins (i,j) to (i,j+1).
// Face ids are cells j*nx + i, with nx*ny standing for the outer face.
struct DiscretePolygon {
    double delta = 0.0;
    double ell = 0.0;
    int nx = 0;
    int ny = 0;
    // vertex ids of the inner boundary, one full counterclockwise cycle
    // starting at (0,0)
    std::vector<int> boundary;
    // positions into `boundary` of the marked vertices, strictly increasing
    std::vector<std::size_t> marked;

    int n_vertices() const { return (nx + 1) * (ny + 1); }
    int n_cells() const { return nx * ny; }
    int n_edges() const { return nx * (ny + 1) + ny * (nx + 1); }
    int n_marks() const { return static_cast<int>(marked.size()); }

    int vertex_id(int i, int j) const { return j * (nx + 1) + i; }
    std::pair<int, int> vertex_ij(int id) const {
        return {id % (nx + 1), id / (nx + 1)};
    }
    cplx vertex_pos(int id) const {
        auto [i, j] = vertex_ij(id);
        return {delta * i, delta * j};
    }
    bool on_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx || j == ny;
    }

    int horizontal_edge(int i, int j) const { return j * nx + i; }
    int vertical_edge(int i, int j) const {
        return nx * (ny + 1) + j * (nx + 1) + i;
    }
    bool edge_is_horizontal(int e) const { return e < nx * (ny + 1); }
    // endpoint vertex ids of an edge
    std::pair<int, int> edge_vertices(int e) const;
    cplx edge_midpoint(int e) const;
    // edge joining two lattice-adjacent vertices; throws if not adjacent
    int edge_between_vertices(int u, int v) const;

    int outer_face() const { return nx * ny; }
    // the two face ids separated by an edge (cell below/left first for
    // horizontal/vertical edges; out-of-range cells collapse to the outer face)
    std::pair<int, int> faces_of_edge(int e) const;
    // inverse of faces_of_edge; the faces must be adjacent
    int edge_between_faces(int f1, int f2) const;

    // marked vertex id of mark i (0-based)
    int mark_vertex(int i) const {
        return boundary[marked[static_cast<std::size_t>(i)]];
    }
    // boundary vertex ids of arc i, from mark i to mark i+1 inclusive (cyclic)
    std::vector<int> arc(int i) const;
};

// Snap 2N perimeter fractions (counterclockwise from the origin corner,
// strictly increasing in [0,1)) to boundary vertices. Throws ResolutionError
// when two marks land on the same vertex or the snap breaks cyclic order.
DiscretePolygon build_rectangle(double ell, double delta,
                                const std::vector<double>& mark_fractions);

// V - E + F including the outer face; 2 for every simply connected region
int euler_characteristic(const DiscretePolygon& p);

// Medial companion of a polygon: one medial vertex per primal edge (its
// midpoint), and per cell the four diamond sides connecting midpoints of
// edges that meet at a cell corner.
struct MedialGraph {
    // position[e] is the midpoint of primal edge e
    std::vector<cplx> position;
    // per cell: edge ids in the order bottom, right, top, left
    std::vector<std::array<int, 4>> cell_edges;
    // medial vertex (edge id) assigned to each mark: the boundary edge
    // leaving the mark counterclockwise
    std::vector<int> marked;

    int n_vertices() const { return static_cast<int>(position.size()); }
};

MedialGraph medial_graph(const DiscretePolygon& p);

// A boundary-to-boundary walk on the medial graph, stored as the sequence of
// primal edges whose midpoints it visits. Both lattice samplers produce these.
struct MedialPath {
    std::vector<int> edges;
    int start_mark = -1;
    int end_mark = -1;
};

// Read off which mark connects to which. Marks are reported 1-based in the
// pattern. Throws NonPlanarError when the matching is not a link pattern.
LinkPattern classify_pattern(const std::vector<MedialPath>& paths);

// Midpoint coordinates along a traced path
std::vector<cplx> path_points(const DiscretePolygon& p, const MedialPath& path);

} // namespace msle
