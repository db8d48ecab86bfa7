#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyperdyn/metric_space.hpp"

namespace hyperdyn {

using SpacePtr = std::shared_ptr<const Space>;

inline SpacePtr make_space(Space s) { return std::make_shared<const Space>(std::move(s)); }

/// Finite, nonempty, lexicographically sorted and duplicate-free point set.
/// Stands in for a compact subset of the ambient space at resolution h
/// (h == 0 marks an exact finite set).
class CompactSet {
public:
    /// Validates, sorts and deduplicates. Throws std::invalid_argument on an
    /// empty list or an out-of-domain point.
    static CompactSet from_flat(SpacePtr space, std::vector<double> coords, double resolution = 0.0) {
        if (!space) throw std::invalid_argument("CompactSet: null space");
        const std::size_t d = space->coord_count();
        if (coords.empty() || coords.size() % d != 0)
            throw std::invalid_argument("CompactSet: need a nonempty list of points of matching dimension");
        if (!(resolution >= 0.0) || !std::isfinite(resolution))
            throw std::invalid_argument("CompactSet: resolution must be finite and >= 0");
        for (double& x : coords) x += 0.0;  // fold -0.0 into +0.0
        for (std::size_t i = 0; i < coords.size(); i += d) {
            if (!space->in_domain(PointView(coords.data() + i, d)))
                throw std::invalid_argument("CompactSet: point outside the domain");
        }
        CompactSet s;
        s.space_ = std::move(space);
        s.resolution_ = resolution;
        s.coords_ = canonicalize(std::move(coords), d);
        return s;
    }

    static CompactSet from_points(SpacePtr space, const std::vector<Point>& points, double resolution = 0.0) {
        std::vector<double> flat;
        const std::size_t d = space ? space->coord_count() : 0;
        flat.reserve(points.size() * d);
        for (const auto& p : points) {
            if (p.size() != d) throw std::invalid_argument("CompactSet: dimension mismatch");
            flat.insert(flat.end(), p.begin(), p.end());
        }
        return from_flat(std::move(space), std::move(flat), resolution);
    }

    /// Trusted constructor: coords must already be canonical and in-domain.
    static CompactSet from_canonical(SpacePtr space, std::vector<double> coords, double resolution) {
        CompactSet s;
        s.space_ = std::move(space);
        s.resolution_ = resolution;
        s.coords_ = std::move(coords);
        return s;
    }

    const Space& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    double resolution() const { return resolution_; }
    std::size_t dim() const { return space_->coord_count(); }
    std::size_t size() const { return coords_.size() / dim(); }

    PointView point(std::size_t i) const { return PointView(coords_.data() + i * dim(), dim()); }
    std::span<const double> coords() const { return coords_; }

    std::vector<Point> points() const {
        std::vector<Point> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.emplace_back(point(i).begin(), point(i).end());
        return out;
    }

    bool same_space(const CompactSet& other) const {
        return space_ == other.space_ || *space_ == *other.space_;
    }

    /// Equal point lists (resolution is metadata and not compared).
    bool operator==(const CompactSet& other) const {
        return same_space(other) && coords_ == other.coords_;
    }

    bool contains(PointView p) const {
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (less(point(mid), p))
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo < size() && std::equal(p.begin(), p.end(), point(lo).begin());
    }

    bool subset_of(const CompactSet& other) const {
        if (!same_space(other)) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (!other.contains(point(i))) return false;
        return true;
    }

    /// FNV-1a over the coordinate bit patterns.
    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (double x : coords_) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
        return h;
    }

    static bool less(PointView a, PointView b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }

    /// Sort points lexicographically and drop exact duplicates.
    static std::vector<double> canonicalize(std::vector<double> coords, std::size_t d) {
        const std::size_t n = coords.size() / d;
        if (d == 1) {
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
            return coords;
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto view = [&](std::size_t i) { return PointView(coords.data() + i * d, d); };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return less(view(a), view(b)); });
        std::vector<double> out;
        out.reserve(coords.size());
        for (std::size_t k = 0; k < n; ++k) {
            const auto p = view(order[k]);
            if (k > 0 && std::equal(p.begin(), p.end(), view(order[k - 1]).begin())) continue;
            out.insert(out.end(), p.begin(), p.end());
        }
        return out;
    }

private:
    CompactSet() = default;

    SpacePtr space_;
    double resolution_ = 0.0;
    std::vector<double> coords_;
};

/// Finite h-net of the whole domain: lattice points of cell h (clamped to the
/// box so the faces are included), minus excluded regions. On the circle,
/// the fewest equally spaced angles whose chordal covering radius is <= h.
inline CompactSet grid_net(const SpacePtr& space, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid_net: h must be > 0");
    const Space& s = *space;
    if (s.is_circle()) {
        std::int64_t n = 1;
        if (h < 2.0) n = static_cast<std::int64_t>(std::ceil(std::numbers::pi / (2.0 * std::asin(h / 2.0))));
        std::vector<double> angles;
        angles.reserve(static_cast<std::size_t>(n));
        for (std::int64_t k = 0; k < n; ++k) angles.push_back(static_cast<double>(k) * (two_pi / static_cast<double>(n)));
        return CompactSet::from_flat(space, std::move(angles), h);
    }
    const std::size_t d = s.coord_count();
    double step = h;
    // cells next to a removed ball need a finer lattice to keep coverage <= h
    for (const auto& e : s.excluded())
        if (e.radius > 0.0 && d >= 2) step = h / 2.0;
    std::vector<std::vector<double>> axes(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto lo = static_cast<std::int64_t>(std::floor(s.lower()[i] / step));
        const auto hi = static_cast<std::int64_t>(std::ceil(s.upper()[i] / step));
        for (std::int64_t k = lo; k <= hi; ++k)
            axes[i].push_back(std::clamp(static_cast<double>(k) * step, s.lower()[i], s.upper()[i]));
        axes[i].erase(std::unique(axes[i].begin(), axes[i].end()), axes[i].end());
    }
    std::vector<double> flat;
    std::vector<std::size_t> counter(d, 0);
    Point p(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i) p[i] = axes[i][counter[i]];
        if (!s.excluded_point(p)) flat.insert(flat.end(), p.begin(), p.end());
        bool done = true;
        for (std::size_t j = d; j-- > 0;) {
            if (++counter[j] < axes[j].size()) {
                done = false;
                break;
            }
            counter[j] = 0;
        }
        if (done) break;
    }
    if (flat.empty()) throw EmptyDomain("grid_net: domain is empty after exclusions");
    return CompactSet::from_flat(space, std::move(flat), h);
}

/// Net of a closed interval [a, b] inside a one-dimensional space: both
/// endpoints exactly, plus the lattice points of cell h strictly between them.
inline CompactSet interval_net(const SpacePtr& space, double a, double b, double h) {
    if (space->coord_count() != 1 || space->is_circle())
        throw std::invalid_argument("interval_net: needs a one-dimensional box space");
    if (!(a <= b)) throw std::invalid_argument("interval_net: need a <= b");
    if (!(h > 0.0)) throw std::invalid_argument("interval_net: h must be > 0");
    std::vector<double> xs{a};
    const auto lo = static_cast<std::int64_t>(std::floor(a / h)) + 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(b / h)) - 1;
    for (std::int64_t k = lo; k <= hi; ++k) {
        const double x = static_cast<double>(k) * h;
        if (x > a && x < b) xs.push_back(x);
    }
    xs.push_back(b);
    return CompactSet::from_flat(space, std::move(xs), h);
}

}  // namespace hyperdyn
