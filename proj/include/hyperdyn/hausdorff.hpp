#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hyperdyn/compact_set.hpp"
#include "hyperdyn/spatial_index.hpp"

namespace hyperdyn {

namespace detail {

inline void require_same_space(const CompactSet& a, const CompactSet& b, const char* who) {
    if (!a.same_space(b)) throw std::invalid_argument(std::string(who) + ": sets live in different spaces");
}

}  // namespace detail

/// d(p, B) = min over b in B of d(p, b).
inline double point_set_distance(PointView p, const CompactSet& b) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) m = std::min(m, b.space().distance_unchecked(p, b.point(j)));
    return m;
}

/// sup over a in A of d(a, B), by full double loop.
inline double directed_hausdorff(const CompactSet& a, const CompactSet& b) {
    detail::require_same_space(a, b, "directed_hausdorff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, point_set_distance(a.point(i), b));
    return s;
}

/// Hausdorff distance as the larger of the two directed sup-inf distances.
inline double hausdorff(const CompactSet& a, const CompactSet& b) {
    detail::require_same_space(a, b, "hausdorff");
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Directed sup-inf distance answered through a nearest-neighbor index of B.
inline double directed_hausdorff_indexed(const CompactSet& a, const SpatialIndex& b_index) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // points already within the running sup cannot raise it
        const double m = b_index.nearest_above(a.point(i), s);
        if (m > s) s = m;
    }
    return s;
}

/// Same value as hausdorff(), bit for bit, using spatial indexes.
inline double hausdorff_indexed(const CompactSet& a, const CompactSet& b) {
    detail::require_same_space(a, b, "hausdorff_indexed");
    const SpatialIndex ia(a), ib(b);
    return std::max(directed_hausdorff_indexed(a, ib), directed_hausdorff_indexed(b, ia));
}

/// Dispatches to the indexed kernel for large inputs. Identical results.
inline double hausdorff_fast(const CompactSet& a, const CompactSet& b) {
    if (a.size() * b.size() <= 4096) return hausdorff(a, b);
    return hausdorff_indexed(a, b);
}

/// True iff B lies in the open r-dilation of A: every b has some a with d(a, b) < r.
inline bool dilation_covers(const CompactSet& a, const CompactSet& b, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("dilation_covers: r must be > 0");
    detail::require_same_space(a, b, "dilation_covers");
    const Space& s = a.space();
    if (a.size() * b.size() > 4096) {
        const SpatialIndex ia(a);
        for (std::size_t j = 0; j < b.size(); ++j)
            if (!(ia.nearest(b.point(j)) < r)) return false;
        return true;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        bool hit = false;
        for (std::size_t i = 0; i < a.size() && !hit; ++i) hit = s.distance_unchecked(a.point(i), b.point(j)) < r;
        if (!hit) return false;
    }
    return true;
}

/// Hausdorff distance as inf{r > 0 : A in O_r(B) and B in O_r(A)}, located by
/// bisection on r. The result is an r that covers both ways and lies within
/// tol of the infimum.
inline double hausdorff_bisection(const CompactSet& a, const CompactSet& b, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("hausdorff_bisection: tol must be > 0");
    detail::require_same_space(a, b, "hausdorff_bisection");
    auto covers = [&](double r) { return dilation_covers(a, b, r) && dilation_covers(b, a, r); };
    double lo = 0.0;
    double hi = a.space().diameter_bound();
    while (!covers(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        if (covers(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Round each point to the lattice of cell h, clamp into the domain and
/// deduplicate. d_H(A, snap(A)) <= (h/2) sqrt(dimension) away from exclusions.
inline CompactSet snap_to_grid(const CompactSet& a, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("snap_to_grid: h must be > 0");
    const Space& s = a.space();
    const std::size_t d = a.dim();
    std::vector<double> out(a.coords().size());
    for (std::size_t i = 0; i < a.size(); ++i) s.snap(a.point(i), std::span<double>(out.data() + i * d, d), h);
    for (double& x : out) x += 0.0;
    return CompactSet::from_canonical(a.space_ptr(), CompactSet::canonicalize(std::move(out), d), h);
}

}  // namespace hyperdyn
