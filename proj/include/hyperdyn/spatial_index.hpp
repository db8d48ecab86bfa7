#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "hyperdyn/compact_set.hpp"

namespace hyperdyn {

/// Nearest-neighbor index over the points of a CompactSet.
///
/// Box spaces of one coordinate use the sorted point list directly; the
/// circle uses the sorted angle list with wrap-around; higher dimensions use
/// a kd-tree with per-node bounding boxes.
///
/// Every distance that is returned is computed by Space::distance_unchecked
/// on an actual pair of points, so results agree bit for bit with a brute
/// force scan. Box lower bounds are built from the same rounded coordinate
/// differences as the distance itself and never exceed it.
class SpatialIndex {
public:
    explicit SpatialIndex(const CompactSet& set) : set_(&set), space_(&set.space()), d_(set.dim()) {
        if (d_ >= 2) build_tree();
    }

    /// Exact nearest distance from q when that distance exceeds `cutoff`;
    /// otherwise some distance <= cutoff (the search stops early).
    double nearest_above(PointView q, double cutoff) const {
        if (d_ == 1) return space_->is_circle() ? nearest_circle(q) : nearest_line(q);
        double best = std::numeric_limits<double>::infinity();
        search(0, q, cutoff, best);
        return best;
    }

    double nearest(PointView q) const { return nearest_above(q, -1.0); }

private:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // range in order_
        std::int32_t left = -1, right = -1;
        std::vector<double> lo, hi;
    };

    static constexpr std::uint32_t leaf_size = 8;

    double nearest_line(PointView q) const {
        const auto xs = set_->coords();
        const auto it = std::lower_bound(xs.begin(), xs.end(), q[0]);
        double best = std::numeric_limits<double>::infinity();
        if (it != xs.end()) best = std::fabs(*it - q[0]);
        if (it != xs.begin()) best = std::min(best, std::fabs(*(it - 1) - q[0]));
        return best;
    }

    double nearest_circle(PointView q) const {
        const auto xs = set_->coords();
        const std::size_t n = xs.size();
        double best = std::numeric_limits<double>::infinity();
        if (n <= 8) {
            for (double x : xs) best = std::min(best, space_->distance_unchecked(q, PointView(&x, 1)));
            return best;
        }
        // chord length is monotone in the wrapped angle; a few neighbors on
        // each side absorb rounding near ties
        const auto pos = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), q[0]) - xs.begin());
        for (std::size_t k = 0; k < 3; ++k) {
            const std::size_t up = (pos + k) % n;
            const std::size_t down = (pos + n - 1 - k) % n;
            best = std::min(best, space_->distance_unchecked(q, PointView(&xs[up], 1)));
            best = std::min(best, space_->distance_unchecked(q, PointView(&xs[down], 1)));
        }
        return best;
    }

    void build_tree() {
        const std::size_t n = set_->size();
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), std::uint32_t{0});
        nodes_.reserve(2 * n / leaf_size + 2);
        build(0, static_cast<std::uint32_t>(n));
    }

    std::int32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        Node node;
        node.begin = begin;
        node.end = end;
        node.lo.assign(d_, std::numeric_limits<double>::infinity());
        node.hi.assign(d_, -std::numeric_limits<double>::infinity());
        for (std::uint32_t i = begin; i < end; ++i) {
            const auto p = set_->point(order_[i]);
            for (std::size_t k = 0; k < d_; ++k) {
                node.lo[k] = std::min(node.lo[k], p[k]);
                node.hi[k] = std::max(node.hi[k], p[k]);
            }
        }
        if (end - begin > leaf_size) {
            std::size_t axis = 0;
            for (std::size_t k = 1; k < d_; ++k)
                if (node.hi[k] - node.lo[k] > node.hi[axis] - node.lo[axis]) axis = k;
            const std::uint32_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](std::uint32_t a, std::uint32_t b) {
                                 return set_->point(a)[axis] < set_->point(b)[axis];
                             });
            node.left = build(begin, mid);
            node.right = build(mid, end);
        }
        nodes_[static_cast<std::size_t>(id)] = std::move(node);
        return id;
    }

    double lower_bound(const Node& node, PointView q) const {
        if (space_->kind() == SpaceKind::chebyshev) {
            double m = 0.0;
            for (std::size_t k = 0; k < d_; ++k) m = std::max(m, gap(node, q, k));
            return m;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < d_; ++k) {
            const double g = gap(node, q, k);
            s += g * g;
        }
        return std::sqrt(s);
    }

    static double gap(const Node& node, PointView q, std::size_t k) {
        if (q[k] < node.lo[k]) return node.lo[k] - q[k];
        if (q[k] > node.hi[k]) return q[k] - node.hi[k];
        return 0.0;
    }

    void search(std::int32_t id, PointView q, double cutoff, double& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.left < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                best = std::min(best, space_->distance_unchecked(q, set_->point(order_[i])));
                if (best <= cutoff) return;
            }
            return;
        }
        const Node& l = nodes_[static_cast<std::size_t>(node.left)];
        const Node& r = nodes_[static_cast<std::size_t>(node.right)];
        double bl = lower_bound(l, q), br = lower_bound(r, q);
        std::int32_t first = node.left, second = node.right;
        if (br < bl) {
            std::swap(first, second);
            std::swap(bl, br);
        }
        if (bl <= best) search(first, q, cutoff, best);
        if (best <= cutoff) return;
        if (br <= best) search(second, q, cutoff, best);
    }

    const CompactSet* set_;
    const Space* space_;
    std::size_t d_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace hyperdyn
