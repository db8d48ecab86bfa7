#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperdyn/errors.hpp"

namespace hyperdyn {

using Point = std::vector<double>;
using PointView = std::span<const double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class SpaceKind { euclidean, chebyshev, circle };

inline std::string_view to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::euclidean: return "euclidean";
        case SpaceKind::chebyshev: return "chebyshev";
        case SpaceKind::circle: return "circle";
    }
    return "?";
}

inline SpaceKind space_kind_from_string(std::string_view s) {
    if (s == "euclidean") return SpaceKind::euclidean;
    if (s == "chebyshev") return SpaceKind::chebyshev;
    if (s == "circle") return SpaceKind::circle;
    throw std::invalid_argument("unknown space kind: " + std::string(s));
}

/// Open ball removed from a box domain. Radius 0 removes the single point.
struct Exclusion {
    Point center;
    double radius = 0.0;

    bool operator==(const Exclusion&) const = default;
};

/// Wrap an angle into [0, 2*pi).
inline double normalize_angle(double theta) {
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t = 0.0;
    return t;
}

/// Ambient metric space: a box in R^n with the Euclidean or max metric, or
/// the unit circle with the chordal metric. Circle points carry one stored
/// coordinate (the angle) but the space has dimension 2.
class Space {
public:
    static Space box(SpaceKind kind, std::vector<double> lower, std::vector<double> upper,
                     std::vector<Exclusion> excluded = {}) {
        if (kind == SpaceKind::circle)
            throw std::invalid_argument("Space::box: use Space::circle() for the circle");
        if (lower.empty() || lower.size() != upper.size())
            throw std::invalid_argument("Space::box: bounds must be nonempty and of equal length");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
                throw std::invalid_argument("Space::box: need finite lower < upper in every coordinate");
        }
        Space s;
        s.kind_ = kind;
        s.lower_ = std::move(lower);
        s.upper_ = std::move(upper);
        for (const auto& e : excluded) {
            if (e.center.size() != s.lower_.size())
                throw std::invalid_argument("Space::box: exclusion dimension mismatch");
            if (!(e.radius >= 0.0) || !std::isfinite(e.radius))
                throw std::invalid_argument("Space::box: exclusion radius must be finite and >= 0");
            for (std::size_t i = 0; i < e.center.size(); ++i) {
                if (!(s.lower_[i] < e.center[i] - e.radius && e.center[i] + e.radius < s.upper_[i]))
                    throw std::invalid_argument("Space::box: exclusions must lie strictly inside the box");
            }
        }
        s.excluded_ = std::move(excluded);
        return s;
    }

    static Space interval(double lo, double hi, std::vector<Exclusion> excluded = {}) {
        return box(SpaceKind::euclidean, {lo}, {hi}, std::move(excluded));
    }

    static Space circle() {
        Space s;
        s.kind_ = SpaceKind::circle;
        return s;
    }

    SpaceKind kind() const { return kind_; }
    bool is_circle() const { return kind_ == SpaceKind::circle; }

    /// Dimension of the ambient space (2 for the circle).
    std::size_t dimension() const { return is_circle() ? 2 : lower_.size(); }

    /// Number of stored coordinates per point (1 for the circle).
    std::size_t coord_count() const { return is_circle() ? 1 : lower_.size(); }

    std::span<const double> lower() const { return lower_; }
    std::span<const double> upper() const { return upper_; }
    const std::vector<Exclusion>& excluded() const { return excluded_; }

    double distance(PointView p, PointView q) const {
        if (p.size() != coord_count() || q.size() != coord_count())
            throw std::invalid_argument("distance: dimension mismatch");
        return distance_unchecked(p, q);
    }

    double distance_unchecked(PointView p, PointView q) const {
        switch (kind_) {
            case SpaceKind::circle:
                return 2.0 * std::sin(std::fabs(p[0] - q[0]) * 0.5);
            case SpaceKind::chebyshev: {
                double m = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) m = std::max(m, std::fabs(p[i] - q[i]));
                return m;
            }
            case SpaceKind::euclidean:
                if (p.size() == 1) return std::fabs(p[0] - q[0]);
                double s = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double d = p[i] - q[i];
                    s += d * d;
                }
                return std::sqrt(s);
        }
        return 0.0;
    }

    /// Coordinates finite, right length, circle angle normalized.
    bool valid(PointView p) const {
        if (p.size() != coord_count()) return false;
        for (double x : p)
            if (!std::isfinite(x)) return false;
        if (is_circle()) return p[0] >= 0.0 && p[0] < two_pi;
        return true;
    }

    bool in_box(PointView p) const {
        if (is_circle()) return true;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
        return true;
    }

    bool excluded_point(PointView p) const {
        for (const auto& e : excluded_) {
            if (e.radius == 0.0) {
                if (std::equal(p.begin(), p.end(), e.center.begin())) return true;
            } else if (distance_unchecked(p, e.center) < e.radius) {
                return true;
            }
        }
        return false;
    }

    bool in_domain(PointView p) const {
        if (p.size() != coord_count())
            throw std::invalid_argument("in_domain: dimension mismatch");
        return valid(p) && in_box(p) && !excluded_point(p);
    }

    /// Distance from p to the nearest excluded region (infinity if none).
    double distance_to_exclusions(PointView p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& e : excluded_)
            best = std::min(best, std::max(0.0, distance_unchecked(p, e.center) - e.radius));
        return best;
    }

    /// Project onto the box (or wrap the angle). Leaves exclusions alone.
    void clamp(std::span<double> p) const {
        if (is_circle()) {
            p[0] = normalize_angle(p[0]);
            return;
        }
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lower_[i], upper_[i]);
    }

    /// Upper bound on the diameter: box diagonal in this metric, or 2.
    double diameter_bound() const {
        if (is_circle()) return 2.0;
        std::vector<double> a(lower_), b(upper_);
        return distance_unchecked(a, b);
    }

    // Snapping lattice. Box lattices are anchored at the origin with cell h
    // and clamped to the box; the circle lattice has ceil(2*pi/h) equally
    // spaced angles.

    static std::int64_t circle_lattice_size(double h) {
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(two_pi / h)));
    }

    /// Snap p to the lattice of cell size h. If the lattice point falls in an
    /// excluded region, the nearest in-domain lattice point is used instead.
    void snap(PointView p, std::span<double> out, double h) const {
        if (is_circle()) {
            const std::int64_t n = circle_lattice_size(h);
            const double step = two_pi / static_cast<double>(n);
            std::int64_t k = std::llround(p[0] / step) % n;
            if (k < 0) k += n;
            out[0] = static_cast<double>(k) * step;
            return;
        }
        thread_local std::vector<std::int64_t> idx;
        idx.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) idx[i] = std::llround(p[i] / h);
        lattice_value(idx, out, h);
        if (!excluded_point(out)) return;
        relocate_from_exclusion(p, idx, out, h);
    }

    bool operator==(const Space&) const = default;

private:
    void lattice_value(std::span<const std::int64_t> idx, std::span<double> out, double h) const {
        for (std::size_t i = 0; i < idx.size(); ++i)
            out[i] = std::clamp(static_cast<double>(idx[i]) * h, lower_[i], upper_[i]);
    }

    void relocate_from_exclusion(PointView p, std::span<const std::int64_t> base, std::span<double> out,
                                 double h) const {
        double max_r = 0.0;
        for (const auto& e : excluded_) max_r = std::max(max_r, e.radius);
        const auto shells = static_cast<std::int64_t>(std::ceil(max_r / h)) + 2;
        const std::size_t d = base.size();
        std::vector<std::int64_t> off(d), idx(d);
        std::vector<double> cand(d), best;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::int64_t k = 1; k <= shells; ++k) {
            // enumerate the cube of half-width k, keep only its surface
            std::fill(off.begin(), off.end(), -k);
            while (true) {
                bool on_shell = false;
                for (auto o : off)
                    if (o == k || o == -k) on_shell = true;
                if (on_shell) {
                    for (std::size_t i = 0; i < d; ++i) idx[i] = base[i] + off[i];
                    lattice_value(idx, cand, h);
                    if (!excluded_point(cand)) {
                        const double dist = distance_unchecked(p, cand);
                        if (dist < best_dist || (dist == best_dist && cand < best)) {
                            best_dist = dist;
                            best = cand;
                        }
                    }
                }
                std::size_t j = 0;
                while (j < d && off[j] == k) off[j++] = -k;
                if (j == d) break;
                ++off[j];
            }
            // every point of shell k+1 is at least (k + 1/2) h away from p
            if (!best.empty() && (static_cast<double>(k) + 0.5) * h > best_dist) break;
        }
        if (best.empty()) throw EmptyDomain("snap: no in-domain lattice point near excluded region");
        std::copy(best.begin(), best.end(), out.begin());
    }

    SpaceKind kind_ = SpaceKind::euclidean;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<Exclusion> excluded_;
};

inline double distance(const Space& space, PointView p, PointView q) { return space.distance(p, q); }

inline bool in_domain(const Space& space, PointView p) { return space.in_domain(p); }

}  // namespace hyperdyn
