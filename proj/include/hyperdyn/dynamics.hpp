#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hyperdyn/compact_set.hpp"
#include "hyperdyn/hausdorff.hpp"

namespace hyperdyn {

/// x -> M x + b, M stored row-major.
struct AffineBranch {
    std::vector<double> matrix;
    std::vector<double> offset;
};

/// Coordinatewise x -> sign(x) |x|^p, with 0 -> 0.
struct PowerBranch {
    double exponent = 1.0;
};

/// Circle rotation theta -> theta + alpha (mod 2 pi).
struct RotationBranch {
    double alpha = 0.0;
};

struct IdentityBranch {};

/// Arbitrary continuous point map supplied by the caller. Continuity cannot
/// be checked and is taken on trust.
struct LeafMapBranch {
    std::string name;
    std::function<void(PointView, std::span<double>)> map;
};

using Branch = std::variant<AffineBranch, PowerBranch, RotationBranch, IdentityBranch, LeafMapBranch>;

/// alpha = pi (sqrt 5 - 1), so alpha / pi is irrational.
inline const double irrational_rotation_angle = std::numbers::pi * (std::sqrt(5.0) - 1.0);

/// Anything that maps compact sets to compact sets at resolution h.
/// `generated_by_multimap` separates Hutchinson operators of point maps from
/// operators that only act on the hyperspace.
template <class Op>
concept SetOperator = requires(const Op& op, const CompactSet& a, double h) {
    { op.apply(a, h) } -> std::same_as<CompactSet>;
    { op.generated_by_multimap() } -> std::convertible_to<bool>;
    { op.name() } -> std::convertible_to<std::string>;
};

/// Finite family of continuous self-maps of the domain (an IFS); x maps to
/// the set of branch images.
class MultiMap {
public:
    MultiMap(SpacePtr space, std::vector<Branch> branches, std::string name = "multimap")
        : space_(std::move(space)), branches_(std::move(branches)), name_(std::move(name)) {
        if (!space_) throw std::invalid_argument("MultiMap: null space");
        if (branches_.empty()) throw std::invalid_argument("MultiMap: need at least one branch");
        for (const auto& b : branches_) check_shape(b);
        check_invariance();
    }

    const Space& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::string& name() const { return name_; }
    bool generated_by_multimap() const { return true; }

    /// Image of x under one branch, pulled back into the box when rounding
    /// pushes it out by an ulp.
    void apply_branch(std::size_t i, PointView x, std::span<double> out) const {
        std::visit([&](const auto& b) { apply_one(b, x, out); }, branches_[i]);
        space_->clamp(out);
    }

    /// F(x) = { f_i(x) } as an exact finite set.
    CompactSet evaluate(PointView x) const {
        if (!space_->in_domain(x)) throw std::invalid_argument("evaluate: point outside the domain");
        const std::size_t d = space_->coord_count();
        std::vector<double> out(branches_.size() * d);
        for (std::size_t i = 0; i < branches_.size(); ++i)
            apply_branch(i, x, std::span<double>(out.data() + i * d, d));
        return CompactSet::from_flat(space_, std::move(out), 0.0);
    }

    /// Hutchinson operator: union of F(x) over x in A, snapped to the lattice
    /// of cell h (h == 0 keeps the exact union).
    CompactSet apply(const CompactSet& a, double h) const {
        if (!(a.space() == *space_)) throw std::invalid_argument("hutchinson_apply: set is not in the map's space");
        if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("hutchinson_apply: h must be >= 0");
        const std::size_t d = space_->coord_count();
        const std::size_t m = branches_.size();
        std::vector<double> out(a.size() * m * d);
        std::vector<double> tmp(d);
        for (std::size_t k = 0; k < a.size(); ++k) {
            for (std::size_t i = 0; i < m; ++i) {
                std::span<double> dst(out.data() + (k * m + i) * d, d);
                if (h > 0.0) {
                    apply_branch(i, a.point(k), tmp);
                    space_->snap(tmp, dst, h);
                } else {
                    apply_branch(i, a.point(k), dst);
                }
            }
        }
        for (double& x : out) x += 0.0;
        if (h == 0.0) return CompactSet::from_flat(space_, std::move(out), 0.0);
        return CompactSet::from_canonical(space_, CompactSet::canonicalize(std::move(out), d), h);
    }

private:
    static void apply_one(const AffineBranch& b, PointView x, std::span<double> out) {
        const std::size_t d = x.size();
        for (std::size_t r = 0; r < d; ++r) {
            double s = b.offset[r];
            for (std::size_t c = 0; c < d; ++c) s += b.matrix[r * d + c] * x[c];
            out[r] = s;
        }
    }
    static void apply_one(const PowerBranch& b, PointView x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0)
                out[i] = 0.0;
            else
                out[i] = std::copysign(std::pow(std::fabs(x[i]), b.exponent), x[i]);
        }
    }
    static void apply_one(const RotationBranch& b, PointView x, std::span<double> out) {
        out[0] = normalize_angle(x[0] + b.alpha);
    }
    static void apply_one(const IdentityBranch&, PointView x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    }
    static void apply_one(const LeafMapBranch& b, PointView x, std::span<double> out) { b.map(x, out); }

    void check_shape(const Branch& branch) const {
        const std::size_t d = space_->coord_count();
        const bool circle = space_->is_circle();
        if (const auto* a = std::get_if<AffineBranch>(&branch)) {
            if (circle) throw std::invalid_argument("MultiMap: affine branch on the circle");
            if (a->matrix.size() != d * d || a->offset.size() != d)
                throw std::invalid_argument("MultiMap: affine branch has wrong shape");
        } else if (std::holds_alternative<PowerBranch>(branch)) {
            if (circle) throw std::invalid_argument("MultiMap: power branch on the circle");
            if (!(std::get<PowerBranch>(branch).exponent > 0.0))
                throw std::invalid_argument("MultiMap: power exponent must be > 0");
        } else if (std::holds_alternative<RotationBranch>(branch)) {
            if (!circle) throw std::invalid_argument("MultiMap: rotation branch needs the circle");
        } else if (const auto* l = std::get_if<LeafMapBranch>(&branch)) {
            if (!l->map) throw std::invalid_argument("MultiMap: empty leaf map");
        }
    }

    // Sampled check that every branch keeps the domain invariant.
    void check_invariance() const {
        double h = 0.05;
        if (!space_->is_circle()) {
            double widest = 0.0;
            for (std::size_t i = 0; i < space_->coord_count(); ++i)
                widest = std::max(widest, space_->upper()[i] - space_->lower()[i]);
            const double per_axis = std::max(2.0, std::floor(std::pow(2000.0, 1.0 / static_cast<double>(space_->coord_count()))));
            h = widest / per_axis;
        }
        const CompactSet probe = grid_net(space_, h);
        const std::size_t d = space_->coord_count();
        std::vector<double> raw(d);
        for (std::size_t k = 0; k < probe.size(); ++k) {
            const auto x = probe.point(k);
            for (std::size_t i = 0; i < branches_.size(); ++i) {
                std::visit([&](const auto& b) { apply_one(b, x, raw); }, branches_[i]);
                for (double v : raw)
                    if (!std::isfinite(v)) throw std::invalid_argument("MultiMap: branch produced a non-finite value");
                if (!space_->is_circle()) {
                    for (std::size_t c = 0; c < d; ++c) {
                        const double slack = 1e-9 * (space_->upper()[c] - space_->lower()[c]);
                        if (raw[c] < space_->lower()[c] - slack || raw[c] > space_->upper()[c] + slack)
                            throw std::invalid_argument("MultiMap: branch " + std::to_string(i) + " leaves the domain");
                    }
                }
                space_->clamp(raw);
                if (!space_->in_domain(raw))
                    throw std::invalid_argument("MultiMap: branch " + std::to_string(i) + " maps into an excluded region");
            }
        }
    }

    SpacePtr space_;
    std::vector<Branch> branches_;
    std::string name_;
};

static_assert(SetOperator<MultiMap>);

inline CompactSet evaluate(const MultiMap& f, PointView x) { return f.evaluate(x); }

inline CompactSet hutchinson_apply(const MultiMap& f, const CompactSet& a, double h) { return f.apply(a, h); }

/// Orbit A_0, ..., A_n of a set operator with per-step residuals
/// d_H(A_k, A_{k+1}) and optional distances d_H(A_k, ref).
struct Trajectory {
    std::vector<CompactSet> sets;
    std::vector<double> residuals;
    std::vector<double> ref_distances;
    double resolution = 0.0;
    /// Hausdorff perturbation that one snapping step may add: (h/2) sqrt(dimension).
    double snap_error_per_step = 0.0;
};

template <SetOperator Op>
Trajectory iterate(const Op& op, const CompactSet& b0, std::size_t n, double h,
                   const std::optional<CompactSet>& ref = std::nullopt) {
    if (n < 1) throw std::invalid_argument("iterate: n must be >= 1");
    if (ref && !ref->same_space(b0)) throw std::invalid_argument("iterate: reference set is in another space");
    Trajectory t;
    t.resolution = h;
    t.snap_error_per_step = 0.5 * h * std::sqrt(static_cast<double>(b0.space().dimension()));
    t.sets.reserve(n + 1);
    t.sets.push_back(b0);
    if (ref) t.ref_distances.push_back(hausdorff_fast(b0, *ref));
    for (std::size_t k = 0; k < n; ++k) {
        CompactSet next = op.apply(t.sets.back(), h);
        t.residuals.push_back(hausdorff_fast(t.sets.back(), next));
        if (ref) t.ref_distances.push_back(hausdorff_fast(next, *ref));
        t.sets.push_back(std::move(next));
    }
    return t;
}

namespace ifs {

/// {x/3, x/3 + 2/3} on [0, 1].
inline MultiMap cantor(const SpacePtr& space) {
    return MultiMap(space, {AffineBranch{{1.0 / 3.0}, {0.0}}, AffineBranch{{1.0 / 3.0}, {2.0 / 3.0}}}, "cantor");
}

/// Three half-scale maps of [0,1]^2 towards (0,0), (1,0) and (1/2, 1).
inline MultiMap sierpinski(const SpacePtr& space) {
    const std::vector<double> half{0.5, 0.0, 0.0, 0.5};
    return MultiMap(space,
                    {AffineBranch{half, {0.0, 0.0}}, AffineBranch{half, {0.5, 0.0}}, AffineBranch{half, {0.25, 0.5}}},
                    "sierpinski");
}

/// Single branch x -> cube root of x.
inline MultiMap cube_root(const SpacePtr& space) {
    return MultiMap(space, {PowerBranch{1.0 / 3.0}}, "cube-root");
}

/// {identity, rotation by alpha} on the circle.
inline MultiMap circle_rotation(const SpacePtr& space, double alpha = irrational_rotation_angle) {
    return MultiMap(space, {IdentityBranch{}, RotationBranch{alpha}}, "circle-rotation");
}

}  // namespace ifs

}  // namespace hyperdyn
