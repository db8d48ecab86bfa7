#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hyperdyn/analysis.hpp"
#include "hyperdyn/dynamics.hpp"
#include "hyperdyn/errors.hpp"
#include "hyperdyn/hausdorff.hpp"
#include "hyperdyn/random.hpp"

namespace hyperdyn {

// ---------------------------------------------------------------------------
// Intervals of [0,1] as points of the triangle T = {(a, b) : 0 <= a <= b <= 1}

struct IntervalPoint {
    double a = 0.0;
    double b = 0.0;

    bool operator==(const IntervalPoint&) const = default;
};

/// [a, b] -> (a, b). With the max metric on T this is an isometry for d_H.
inline IntervalPoint interval_embed(double a, double b) {
    if (!(a <= b)) throw std::invalid_argument("interval_embed: need a <= b");
    if (!(a >= 0.0 && b <= 1.0)) throw std::invalid_argument("interval_embed: interval must lie in [0, 1]");
    return {a, b};
}

inline double chebyshev(IntervalPoint p, IntervalPoint q) { return std::max(std::fabs(p.a - q.a), std::fabs(p.b - q.b)); }

/// Smallest interval containing D.
inline IntervalPoint q_retraction(const CompactSet& d) {
    if (d.dim() != 1 || d.space().is_circle()) throw std::invalid_argument("q_retraction: needs a subset of a line");
    return {d.point(0)[0], d.point(d.size() - 1)[0]};
}

// ---------------------------------------------------------------------------
// Circle <-> projective line. The angle 0 is the point at infinity.

inline double to_projective_line(double theta) {
    if (theta == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::tan(0.5 * theta);
}

inline double from_projective_line(double x) {
    if (std::isinf(x)) return 0.0;
    return normalize_angle(2.0 * std::atan2(1.0, x));
}

/// x -> x + 1 carried to the circle. Angle 0 is the only fixed point.
inline double projective_translate(double theta) {
    if (theta == 0.0) return 0.0;
    return from_projective_line(to_projective_line(theta) + 1.0);
}

// ---------------------------------------------------------------------------
// Leaves of T. With u = a and v = 1 - b the triangle becomes the corner
// simplex u, v >= 0, u + v <= 1 and the vertex A = [0,1] sits at the origin.
// Leaf alpha is the boundary of the triangle with corners O, P and Q, where
// P and Q lie on the line u + v = alpha along the rays at angles
// (pi/4)(1 - alpha) and (pi/4)(1 + alpha). Every leaf passes through O, and
// leaf 1 is the boundary of T.

namespace detail {

struct Leaf {
    double alpha;
    double p[2];
    double q[2];
    double side;   // |OP| = |OQ|
    double edge;   // |PQ|
    double perim;
};

inline Leaf make_leaf(double alpha) {
    constexpr double quarter = std::numbers::pi / 4.0;
    const double phi1 = quarter * (1.0 - alpha), phi2 = quarter * (1.0 + alpha);
    const double side = alpha / (std::cos(phi1) + std::sin(phi1));
    Leaf l{alpha, {side * std::cos(phi1), side * std::sin(phi1)}, {side * std::cos(phi2), side * std::sin(phi2)},
           side, 0.0, 0.0};
    l.edge = std::hypot(l.q[0] - l.p[0], l.q[1] - l.p[1]);
    l.perim = 2.0 * side + l.edge;
    return l;
}

inline IntervalPoint from_uv(double u, double v) {
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0 - u);
    return {u + 0.0, 1.0 - v};
}

}  // namespace detail

/// Index alpha in [0, 1] of the leaf through p; 0 only at the vertex A.
inline double leaf_parameter(IntervalPoint p) {
    const double u = p.a, v = 1.0 - p.b;
    if (u == 0.0 && v == 0.0) return 0.0;
    constexpr double quarter = std::numbers::pi / 4.0;
    const double spread = std::fabs(std::atan2(v, u) - quarter) / quarter;
    return std::min(1.0, std::max(u + v, spread));
}

/// Normalized arc length of p along its leaf, starting at A and running
/// O -> P -> Q -> O. Zero at A.
inline double leaf_position(IntervalPoint p) {
    const double u = p.a, v = 1.0 - p.b;
    if (u == 0.0 && v == 0.0) return 0.0;
    const auto l = detail::make_leaf(leaf_parameter(p));
    const double r = std::hypot(u, v);
    constexpr double quarter = std::numbers::pi / 4.0;
    const double spread = std::fabs(std::atan2(v, u) - quarter) / quarter;
    double arc;
    if (u + v >= spread) {
        arc = l.side + std::clamp(std::hypot(u - l.p[0], v - l.p[1]), 0.0, l.edge);
    } else if (v < u) {
        arc = std::min(r, l.side);
    } else {
        arc = l.perim - std::min(r, l.side);
    }
    return arc / l.perim;
}

/// Point of leaf alpha at normalized arc length t in [0, 1).
inline IntervalPoint leaf_point(double alpha, double t) {
    if (alpha <= 0.0) return {0.0, 1.0};
    const auto l = detail::make_leaf(std::min(alpha, 1.0));
    const double arc = t * l.perim;
    if (arc <= l.side) {
        const double s = arc / l.side;
        return detail::from_uv(s * l.p[0], s * l.p[1]);
    }
    if (arc <= l.side + l.edge) {
        const double s = (arc - l.side) / l.edge;
        return detail::from_uv(l.p[0] + s * (l.q[0] - l.p[0]), l.p[1] + s * (l.q[1] - l.p[1]));
    }
    const double s = (l.perim - arc) / l.side;
    return detail::from_uv(s * l.q[0], s * l.q[1]);
}

/// Projective translation run along each leaf, with A as the pole. G(A) = A.
inline IntervalPoint g_map(IntervalPoint p) {
    const double alpha = leaf_parameter(p);
    if (alpha == 0.0) return p;
    const double theta = two_pi * leaf_position(p);
    return leaf_point(alpha, projective_translate(theta) / two_pi);
}

/// F = G o Q on finite subsets of [0,1]. The image interval is stored as its
/// endpoints plus the interior lattice points of cell h. This operator acts on
/// the hyperspace only; no multivalued map of [0,1] induces it.
class IntervalGQOperator {
public:
    explicit IntervalGQOperator(SpacePtr space) : space_(std::move(space)) {
        if (!(*space_ == Space::interval(0.0, 1.0)))
            throw std::invalid_argument("IntervalGQOperator: needs the plain unit interval");
    }

    CompactSet apply(const CompactSet& d, double h) const {
        if (!(d.space() == *space_)) throw std::invalid_argument("IntervalGQOperator: set is not in [0, 1]");
        if (!(h > 0.0)) throw std::invalid_argument("IntervalGQOperator: h must be > 0");
        const auto img = g_map(q_retraction(d));
        return interval_net(space_, img.a, img.b, h);
    }

    bool generated_by_multimap() const { return false; }
    std::string name() const { return "interval-g"; }
    const SpacePtr& space_ptr() const { return space_; }

private:
    SpacePtr space_;
};

// ---------------------------------------------------------------------------
// Scenario catalog

using ScenarioSystem = std::variant<MultiMap, IntervalGQOperator>;

struct BasinSampler {
    std::string name;
    std::size_t expected_index = 0;  // into Scenario::expected_attractors
    std::function<CompactSet(Rng&)> draw;
};

struct ScenarioTolerances {
    double h = 1e-3;
    double tol = 1e-3;
    std::size_t n_max = 200;
    double attractor_match = 1e-2;  // d_H allowed between the found and expected attractor

    std::vector<double> epsilons{0.05, 0.1, 0.2};
    std::vector<double> deltas{0.04, 0.02, 0.01};
    std::size_t horizon = 500;
    std::size_t samples = 50;
    double sampler_margin = 0.0;

    std::size_t basin_samples = 100;
    double basin_tol = 1e-3;
    std::size_t basin_n_max = 50;

    std::size_t witness_trials = 10000;
    double witness_target = 1.0 - 1e-9;

    double janos_c = 0.5;
    std::size_t janos_horizon = 6;
    double janos_h = 0.0;
    std::size_t janos_pairs = 50;
};

struct Scenario {
    std::string name;
    SpacePtr space;
    ScenarioSystem system;
    CompactSet initial;
    std::vector<CompactSet> expected_attractors;
    std::size_t default_expected = 0;  // attractor reached from `initial`
    std::vector<BasinSampler> basin_samplers;
    std::function<std::pair<CompactSet, CompactSet>(Rng&)> janos_pair;
    std::optional<double> contraction_ratio;
    bool expect_stable = true;
    std::optional<bool> expect_witness;  // at tolerances.witness_target
    std::optional<JanosVerdict> expect_janos;
    ScenarioTolerances tolerances;
    std::string notes;

    bool generated_by_multimap() const { return std::holds_alternative<MultiMap>(system); }

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), system);
    }
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"cantor", "sierpinski", "cube-root", "circle-rotation", "interval-g"};
    return names;
}

/// Largest operator norm over the branches when all are affine; the
/// Euclidean norm for 2x2 blocks comes from the singular values.
inline std::optional<double> affine_lipschitz_bound(const MultiMap& f) {
    const std::size_t d = f.space().coord_count();
    double best = 0.0;
    for (const auto& br : f.branches()) {
        const auto* aff = std::get_if<AffineBranch>(&br);
        if (!aff) return std::nullopt;
        const auto& m = aff->matrix;
        double norm;
        if (d == 1) {
            norm = std::fabs(m[0]);
        } else if (f.space().kind() == SpaceKind::chebyshev) {
            norm = 0.0;
            for (std::size_t r = 0; r < d; ++r) {
                double row = 0.0;
                for (std::size_t c = 0; c < d; ++c) row += std::fabs(m[r * d + c]);
                norm = std::max(norm, row);
            }
        } else if (d == 2) {
            const double a = m[0], b = m[1], c = m[2], e = m[3];
            const double t = a * a + b * b + c * c + e * e, det = a * e - b * c;
            norm = std::sqrt(0.5 * (t + std::sqrt(std::max(0.0, t * t - 4.0 * det * det))));
        } else {
            double fro = 0.0;
            for (double x : m) fro += x * x;
            norm = std::sqrt(fro);
        }
        best = std::max(best, norm);
    }
    return best;
}

namespace detail {

inline CompactSet random_set(const SpacePtr& s, Rng& rng, std::size_t max_points, double lo, double hi) {
    const std::size_t n = 1 + rng.index(max_points);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform(lo, hi);
    return CompactSet::from_flat(s, std::move(xs));
}

inline CompactSet random_cloud_in(const SpacePtr& s, Rng& rng, std::size_t max_points) {
    const std::size_t n = 1 + rng.index(max_points);
    const std::size_t d = s->coord_count();
    std::vector<double> flat;
    Point p(d);
    while (flat.size() < n * d) {
        if (s->is_circle()) {
            p[0] = rng.uniform(0.0, two_pi);
        } else {
            for (std::size_t k = 0; k < d; ++k) p[k] = rng.uniform(s->lower()[k], s->upper()[k]);
        }
        if (s->in_domain(p)) flat.insert(flat.end(), p.begin(), p.end());
    }
    return CompactSet::from_flat(s, std::move(flat));
}

inline CompactSet cantor_level(const SpacePtr& s, int level, double h) {
    std::vector<double> lo{0.0};
    double len = 1.0;
    for (int k = 0; k < level; ++k) {
        len /= 3.0;
        std::vector<double> next;
        for (double x : lo) {
            next.push_back(x);
            next.push_back(x + 2.0 * len);
        }
        lo = std::move(next);
    }
    std::vector<double> xs;
    for (double x : lo) {
        const auto piece = interval_net(s, x, std::min(1.0, x + len), h);
        xs.insert(xs.end(), piece.coords().begin(), piece.coords().end());
    }
    return CompactSet::from_flat(s, std::move(xs), h);
}

inline CompactSet sierpinski_level(const SpacePtr& s, int level, double h) {
    const double t[3][2] = {{0.0, 0.0}, {0.5, 0.0}, {0.25, 0.5}};
    const double v[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}};
    std::vector<std::array<double, 2>> shifts{{0.0, 0.0}};
    double scale = 1.0;
    for (int k = 0; k < level; ++k) {
        std::vector<std::array<double, 2>> next;
        for (const auto& o : shifts)
            for (const auto& tj : t) next.push_back({o[0] + scale * tj[0], o[1] + scale * tj[1]});
        shifts = std::move(next);
        scale *= 0.5;
    }
    std::vector<double> flat;
    for (const auto& o : shifts)
        for (const auto& vj : v) {
            flat.push_back(o[0] + scale * vj[0]);
            flat.push_back(o[1] + scale * vj[1]);
        }
    return snap_to_grid(CompactSet::from_flat(s, std::move(flat)), h);
}

inline Scenario cantor_scenario() {
    auto s = make_space(Space::interval(0.0, 1.0));
    ScenarioTolerances tol;
    tol.h = 1e-4;
    tol.tol = 1e-3;
    tol.attractor_match = 2e-3;
    tol.witness_target = 0.9;
    tol.janos_c = 0.5;
    tol.janos_horizon = 6;
    auto f = ifs::cantor(s);
    const auto ratio = affine_lipschitz_bound(f);
    return Scenario{
        "cantor",
        s,
        std::move(f),
        grid_net(s, tol.h),
        {cantor_level(s, 8, tol.h)},
        0,
        {},
        [s](Rng& rng) { return std::pair{random_set(s, rng, 3, 0.0, 1.0), random_set(s, rng, 3, 0.0, 1.0)}; },
        ratio,
        true,
        false,
        JanosVerdict::geometric_decay,
        tol,
        "Middle-thirds Cantor IFS {x/3, x/3 + 2/3} on [0,1]. Both branches contract by 1/3, so the Hutchinson "
        "operator is a contraction of the hyperspace and its attractor is asymptotically stable.",
    };
}

inline Scenario sierpinski_scenario() {
    auto s = make_space(Space::box(SpaceKind::euclidean, {0.0, 0.0}, {1.0, 1.0}));
    ScenarioTolerances tol;
    tol.h = 5e-3;
    tol.tol = 1e-2;
    tol.n_max = 100;
    tol.attractor_match = 2e-2;
    tol.horizon = 100;
    tol.samples = 10;
    tol.witness_target = 0.9;
    tol.janos_c = 0.75;
    tol.janos_horizon = 4;
    tol.janos_pairs = 10;
    auto f = ifs::sierpinski(s);
    const auto ratio = affine_lipschitz_bound(f);
    return Scenario{
        "sierpinski",
        s,
        std::move(f),
        grid_net(s, 0.1),
        {sierpinski_level(s, 7, tol.h)},
        0,
        {},
        [s](Rng& rng) { return std::pair{random_cloud_in(s, rng, 3), random_cloud_in(s, rng, 3)}; },
        ratio,
        true,
        false,
        JanosVerdict::geometric_decay,
        tol,
        "Sierpinski triangle from three half-scale maps of the unit square. Planar contractive baseline.",
    };
}

inline Scenario cube_root_scenario() {
    auto s = make_space(Space::interval(-1.0, 1.0, {Exclusion{{0.0}, 0.0}}));
    ScenarioTolerances tol;
    tol.h = 1e-4;
    tol.tol = 1e-3;
    tol.n_max = 100;
    tol.attractor_match = 1e-3;
    tol.sampler_margin = 1e-3;
    tol.witness_target = 0.9;
    tol.janos_c = 0.5;
    tol.janos_horizon = 8;
    const double mu = tol.sampler_margin;
    auto left = [s, mu](Rng& rng) { return random_set(s, rng, 8, -1.0, -mu); };
    auto right = [s, mu](Rng& rng) { return random_set(s, rng, 8, mu, 1.0); };
    auto both = [s, left, right](Rng& rng) {
        const auto l = left(rng), r = right(rng);
        std::vector<double> xs(l.coords().begin(), l.coords().end());
        xs.insert(xs.end(), r.coords().begin(), r.coords().end());
        return CompactSet::from_flat(s, std::move(xs));
    };
    std::vector<BasinSampler> samplers{
        {"negative", 0, left},
        {"positive", 1, right},
        {"both-sides", 2, both},
    };
    auto pair = [samplers](Rng& rng) {
        const auto& sm = samplers[rng.index(samplers.size())];
        auto a = sm.draw(rng);
        return std::pair{std::move(a), sm.draw(rng)};
    };
    return Scenario{
        "cube-root",
        s,
        ifs::cube_root(s),
        CompactSet::from_flat(s, {-0.5}),
        {CompactSet::from_flat(s, {-1.0}), CompactSet::from_flat(s, {1.0}), CompactSet::from_flat(s, {-1.0, 1.0})},
        0,
        std::move(samplers),
        pair,
        std::nullopt,
        true,
        true,
        std::nullopt,
        tol,
        "x -> cube root of x on [-1,1] without 0. The hyperspace operator has three attractors: {-1} attracting "
        "sets in [-1,0), {1} attracting sets in (0,1], and {-1,1} attracting sets that meet both sides. Sample "
        "sets keep a margin of 1e-3 from the removed point.",
    };
}

inline Scenario circle_rotation_scenario() {
    auto s = make_space(Space::circle());
    ScenarioTolerances tol;
    tol.h = 0.01;
    tol.tol = 1e-3;
    tol.n_max = 2000;
    tol.attractor_match = 0.02;
    tol.horizon = 200;
    tol.samples = 20;
    tol.witness_target = 1.0 - 1e-9;
    tol.janos_c = 0.9;
    tol.janos_horizon = 64;
    tol.janos_pairs = 10;
    return Scenario{
        "circle-rotation",
        s,
        ifs::circle_rotation(s),
        CompactSet::from_flat(s, {1.0}),
        {grid_net(s, tol.h)},
        0,
        {},
        [s](Rng& rng) {
            return std::pair{CompactSet::from_flat(s, {rng.uniform(0.0, two_pi)}),
                             CompactSet::from_flat(s, {rng.uniform(0.0, two_pi)})};
        },
        std::nullopt,
        true,
        true,
        JanosVerdict::non_geometric,
        tol,
        "{identity, rotation by pi(sqrt(5) - 1)} on the unit circle with the chord metric. Orbits of the rotation "
        "are dense, so every set is attracted to the whole circle, yet the rotation branch is an isometry and no "
        "contraction ratio below 1 exists for this metric.",
    };
}

inline Scenario interval_g_scenario() {
    auto s = make_space(Space::interval(0.0, 1.0));
    ScenarioTolerances tol;
    tol.h = 0.01;
    tol.tol = 1e-4;
    tol.n_max = 5000;
    tol.attractor_match = 0.02;
    tol.epsilons = {0.2};
    tol.deltas = {0.15, 0.1, 0.05, 0.02};
    tol.horizon = 500;
    tol.samples = 50;
    tol.janos_c = 0.9;
    tol.janos_horizon = 64;
    tol.janos_h = tol.h;
    tol.janos_pairs = 10;
    return Scenario{
        "interval-g",
        s,
        IntervalGQOperator(s),
        CompactSet::from_flat(s, {0.3, 0.6}),
        {interval_net(s, 0.0, 1.0, tol.h)},
        0,
        {},
        [s](Rng& rng) { return std::pair{random_set(s, rng, 4, 0.0, 1.0), random_set(s, rng, 4, 0.0, 1.0)}; },
        std::nullopt,
        false,
        std::nullopt,
        std::nullopt,
        tol,
        "F = G o Q on finite subsets of [0,1]: Q takes the enclosing interval, intervals are points (a,b) of the "
        "triangle 0 <= a <= b <= 1, and G runs x -> x + 1 along each leaf of a foliation of that triangle by "
        "triangle boundaries through the vertex [0,1]. The leaves are the boundaries of the triangles spanned by "
        "[0,1] and the rays at angles (pi/4)(1 -/+ alpha) in the coordinates (a, 1 - b), cut by a + 1 - b = alpha; "
        "each leaf is parameterized by normalized arc length with the pole at [0,1]. Every set is attracted to "
        "[0,1], but sets just behind the pole travel around their leaf first, so the attractor is not stable and "
        "F is not a contraction for any equivalent metric. F acts on the hyperspace only.",
    };
}

}  // namespace detail

inline Scenario build_scenario(const std::string& name) {
    if (name == "cantor") return detail::cantor_scenario();
    if (name == "sierpinski") return detail::sierpinski_scenario();
    if (name == "cube-root") return detail::cube_root_scenario();
    if (name == "circle-rotation") return detail::circle_rotation_scenario();
    if (name == "interval-g") return detail::interval_g_scenario();
    throw NotFound("unknown scenario: " + name);
}

// ---------------------------------------------------------------------------
// Planar rotation in a bounded window

struct PlanarRotationDemo {
    std::vector<double> radii;
    std::vector<CompactSet> limits;           // orbit closures after `steps`
    std::vector<std::vector<double>> spread;  // pairwise d_H between limits
};

/// {identity, rotation by alpha} about the origin of the plane, started from
/// the points (r, 0). Each orbit fills its own circle, so limits from
/// different radii stay apart and no single compact set attracts them all.
inline PlanarRotationDemo planar_rotation_window(const std::vector<double>& radii, std::size_t steps, double h,
                                                 double alpha = irrational_rotation_angle) {
    if (radii.empty()) throw std::invalid_argument("planar_rotation_window: no radii");
    double r_max = 0.0;
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("planar_rotation_window: radii must be > 0");
        r_max = std::max(r_max, r);
    }
    const double w = r_max + 2.0 * h + 1.0;
    auto s = make_space(Space::box(SpaceKind::euclidean, {-w, -w}, {w, w}));
    const double c = std::cos(alpha), sn = std::sin(alpha);
    PlanarRotationDemo demo{radii, {}, {}};
    for (double r : radii) {
        std::vector<double> flat{r, 0.0};
        double x = r, y = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double nx = c * x - sn * y, ny = sn * x + c * y;
            x = nx;
            y = ny;
            flat.push_back(x);
            flat.push_back(y);
        }
        auto set = CompactSet::from_flat(s, std::move(flat));
        demo.limits.push_back(h > 0.0 ? snap_to_grid(set, h) : std::move(set));
    }
    demo.spread.assign(radii.size(), std::vector<double>(radii.size(), 0.0));
    for (std::size_t i = 0; i < radii.size(); ++i)
        for (std::size_t j = i + 1; j < radii.size(); ++j)
            demo.spread[i][j] = demo.spread[j][i] = hausdorff_fast(demo.limits[i], demo.limits[j]);
    return demo;
}

}  // namespace hyperdyn
