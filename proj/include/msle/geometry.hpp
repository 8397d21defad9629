#pragma once

#include <complex>
#include <vector>

namespace msle {

using cplx = std::complex<double>;

// minimum euclidean distance between the segments [a1,a2] and [b1,b2]
double segment_distance(cplx a1, cplx a2, cplx b1, cplx b2);

// strict crossing test: the open interiors intersect transversally; shared
// endpoints and collinear overlap do not count
bool segments_cross(cplx a1, cplx a2, cplx b1, cplx b2);

// true if any two non-adjacent segments of the polyline cross
bool polyline_self_intersects(const std::vector<cplx>& pts);

// minimum distance between two polylines (single points count as degenerate
// segments).  When stop_below > 0 the search may return early with any value
// it has already proven to be smaller than stop_below.
double polyline_distance(const std::vector<cplx>& a, const std::vector<cplx>& b,
                         double stop_below = 0.0);

// discrete Frechet distance between two point sequences
double frechet_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

}  // namespace msle
