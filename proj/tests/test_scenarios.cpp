#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gq_oracle.hpp"
#include "hyperdyn/scenarios.hpp"
#include "test_support.hpp"

using namespace hyperdyn;
using namespace hyperdyn::testing;

namespace {

IntervalPoint random_interval_point(Rng& rng) {
    double a = rng.uniform(), b = rng.uniform();
    if (a > b) std::swap(a, b);
    return {a, b};
}

double dist_to_a(IntervalPoint p) { return chebyshev(p, {0.0, 1.0}); }

}  // namespace

TEST(IntervalEmbed, Vertices) {
    EXPECT_EQ(interval_embed(0.0, 1.0), (IntervalPoint{0.0, 1.0}));
    EXPECT_EQ(interval_embed(0.0, 0.0), (IntervalPoint{0.0, 0.0}));
    EXPECT_THROW(interval_embed(0.6, 0.5), std::invalid_argument);
    EXPECT_THROW(interval_embed(-0.1, 0.5), std::invalid_argument);
}

TEST(IntervalEmbed, HausdorffOnDenseNets) {
    const auto s = unit_interval();
    const double h = 1e-4;
    const double dh = hausdorff(interval_net(s, 0.0, 0.5, h), interval_net(s, 0.2, 0.9, h));
    EXPECT_NEAR(dh, 0.4, 2 * h);
    EXPECT_NEAR(chebyshev(interval_embed(0.0, 0.5), interval_embed(0.2, 0.9)), 0.4, 1e-15);
}

TEST(IntervalEmbedProperties, IsometryOnRandomPairs) {
    const auto s = unit_interval();
    const double h = 1e-3;
    Rng rng(50);
    for (int t = 0; t < 1000; ++t) {
        const auto p = random_interval_point(rng), q = random_interval_point(rng);
        const auto np = interval_net(s, p.a, p.b, h), nq = interval_net(s, q.a, q.b, h);
        const double dh = hausdorff(np, nq);
        ASSERT_LE(std::fabs(dh - chebyshev(p, q)), 2 * h);
        if (t < 20) ASSERT_EQ(dh, brute_hausdorff(np, nq));
    }
}

TEST(QRetraction, Examples) {
    const auto s = unit_interval();
    EXPECT_EQ(q_retraction(CompactSet::from_flat(s, {0.7, 0.1, 0.4})), (IntervalPoint{0.1, 0.7}));
    const auto net = interval_net(s, 0.2, 0.5, 1e-3);
    EXPECT_EQ(q_retraction(net), (IntervalPoint{0.2, 0.5}));
    EXPECT_THROW(q_retraction(CompactSet::from_flat(unit_square(), {0.1, 0.2})), std::invalid_argument);
}

TEST(QRetractionProperties, OneLipschitz) {
    const auto s = unit_interval();
    Rng rng(51);
    for (int t = 0; t < 1000; ++t) {
        const auto d1 = random_cloud(s, rng, 1 + rng.index(10)), d2 = random_cloud(s, rng, 1 + rng.index(10));
        ASSERT_LE(chebyshev(q_retraction(d1), q_retraction(d2)), brute_hausdorff(d1, d2));
    }
}

TEST(ProjectiveTranslate, PoleAndUnitShift) {
    EXPECT_EQ(projective_translate(0.0), 0.0);
    EXPECT_NEAR(projective_translate(std::numbers::pi), std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(to_projective_line(projective_translate(from_projective_line(0.0))), 1.0, 1e-15);
}

TEST(ProjectiveTranslate, OrbitFromMinusTenPassesTheFarSide) {
    const auto circ = Space::circle();
    double theta = from_projective_line(-10.0);
    std::vector<double> got;
    for (int k = 0; k <= 20; ++k) {
        got.push_back(circ.distance(Point{theta}, Point{0.0}));
        theta = projective_translate(theta);
    }
    for (int k = 0; k <= 20; ++k) {
        const double x = -10.0 + k;
        EXPECT_NEAR(got[k], 2.0 / std::sqrt(1.0 + x * x), 1e-12) << k;
    }
    for (int k = 1; k <= 10; ++k) EXPECT_GT(got[k], got[k - 1]);
    for (int k = 11; k <= 20; ++k) EXPECT_LT(got[k], got[k - 1]);
    EXPECT_NEAR(got[10], 2.0, 1e-12);
}

TEST(GMap, FixesVertexA) {
    EXPECT_EQ(g_map({0.0, 1.0}), (IntervalPoint{0.0, 1.0}));
    EXPECT_EQ(leaf_parameter({0.0, 1.0}), 0.0);
}

TEST(GMap, OuterLeafIsTheTriangleBoundary) {
    EXPECT_NEAR(leaf_parameter({0.0, 0.0}), 1.0, 1e-15);
    EXPECT_NEAR(leaf_parameter({1.0, 1.0}), 1.0, 1e-15);
    EXPECT_NEAR(leaf_parameter({0.0, 0.5}), 1.0, 1e-15);
    EXPECT_NEAR(leaf_parameter({0.3, 0.3}), 1.0, 1e-15);
}

TEST(GMap, MatchesOracleOrbit) {
    for (double alpha : {0.1, 0.45, 0.8, 1.0}) {
        for (double x0 : {-30.0, -7.5, -1.0, 0.25, 4.0}) {
            IntervalPoint p = oracle_point(alpha, x0);
            for (int k = 0; k <= 40; ++k) {
                const auto o = oracle_point(alpha, x0 + k);
                ASSERT_NEAR(p.a, o.a, 1e-9) << alpha << " " << x0 << " " << k;
                ASSERT_NEAR(p.b, o.b, 1e-9) << alpha << " " << x0 << " " << k;
                p = g_map(p);
            }
        }
    }
}

TEST(GMapProperties, PreservesLeaves) {
    Rng rng(52);
    for (int t = 0; t < 1000; ++t) {
        const auto p = random_interval_point(rng);
        const auto q = g_map(p);
        ASSERT_LE(q.a, q.b);
        ASSERT_GE(q.a, 0.0);
        ASSERT_LE(q.b, 1.0);
        ASSERT_NEAR(leaf_parameter(q), leaf_parameter(p), 1e-12);
    }
}

TEST(GMapProperties, OrbitsReachAButSomeSwingOutFirst) {
    Rng rng(53);
    for (int t = 0; t < 200; ++t) {
        auto p = random_interval_point(rng);
        for (int k = 0; k < 5000; ++k) p = g_map(p);
        ASSERT_LE(dist_to_a(p), 2e-3);
    }
    // just behind the pole on leaf 0.8: start close to A, pass far from it
    const IntervalPoint start = oracle_point(0.8, -20.0);
    auto p = start;
    double peak = 0.0;
    for (int k = 0; k < 200; ++k) {
        p = g_map(p);
        peak = std::max(peak, dist_to_a(p));
    }
    EXPECT_GE(peak, dist_to_a(start));
    EXPECT_GE(peak, 0.3);
}

TEST(IntervalGQ, IsAnOperatorHook) {
    const auto s = unit_interval();
    const IntervalGQOperator f(s);
    static_assert(SetOperator<IntervalGQOperator>);
    EXPECT_FALSE(f.generated_by_multimap());
    const auto b = CompactSet::from_flat(s, {0.3, 0.45, 0.6});
    const auto img = f.apply(b, 0.01);
    const auto g = g_map({0.3, 0.6});
    EXPECT_EQ(img.point(0)[0], g.a);
    EXPECT_EQ(img.point(img.size() - 1)[0], g.b);
    EXPECT_THROW(f.apply(b, 0.0), std::invalid_argument);
    EXPECT_THROW(IntervalGQOperator(make_space(Space::interval(0.0, 2.0))), std::invalid_argument);
    const auto whole = interval_net(s, 0.0, 1.0, 0.01);
    EXPECT_EQ(f.apply(whole, 0.01), whole);
}

TEST(IntervalGQProperties, RandomSetsAreAttracted) {
    const auto s = unit_interval();
    const IntervalGQOperator f(s);
    const double h = 0.01;
    const auto target = interval_net(s, 0.0, 1.0, h);
    Rng rng(54);
    for (int t = 0; t < 30; ++t) {
        CompactSet cur = random_cloud(s, rng, 1 + rng.index(6));
        bool reached = false;
        for (int n = 1; n <= 2000 && !reached; ++n) {
            cur = f.apply(cur, h);
            reached = hausdorff(cur, target) <= 0.02;
        }
        ASSERT_TRUE(reached);
    }
}

TEST(IntervalGQProperties, AttractionIsNotUniform) {
    for (std::size_t n : {10u, 50u, 100u, 500u}) {
        const auto w = find_behind_pole_start(n, 0.05, 0.2, 0.01);
        ASSERT_TRUE(w.has_value()) << n;
        EXPECT_LE(w->start_distance, 0.05);
        EXPECT_GE(w->max_excursion, 0.2);
        EXPECT_LE(w->peak_step, n);
    }
}

TEST(Catalog, NamesAndLookup) {
    std::set<std::string> seen;
    for (const auto& name : scenario_names()) {
        EXPECT_TRUE(seen.insert(name).second);
        const auto sc = build_scenario(name);
        EXPECT_EQ(sc.name, name);
        EXPECT_FALSE(sc.notes.empty());
        for (const auto& a : sc.expected_attractors) {
            EXPECT_TRUE(a.space() == *sc.space);
            for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(sc.space->in_domain(a.point(i)));
        }
    }
    EXPECT_THROW(build_scenario("koch"), NotFound);
}

TEST(Catalog, CubeRootAttractorsAndSamplers) {
    const auto sc = build_scenario("cube-root");
    ASSERT_EQ(sc.expected_attractors.size(), 3u);
    const auto& s = sc.space;
    EXPECT_EQ(sc.expected_attractors[0], CompactSet::from_flat(s, {-1.0}));
    EXPECT_EQ(sc.expected_attractors[1], CompactSet::from_flat(s, {1.0}));
    EXPECT_EQ(sc.expected_attractors[2], CompactSet::from_flat(s, {-1.0, 1.0}));
    ASSERT_EQ(sc.basin_samplers.size(), 3u);
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const auto neg = sc.basin_samplers[0].draw(rng), pos = sc.basin_samplers[1].draw(rng);
        for (double x : neg.coords()) ASSERT_LE(x, -1e-3);
        for (double x : pos.coords()) ASSERT_GE(x, 1e-3);
        const auto both = sc.basin_samplers[2].draw(rng);
        ASSERT_LT(both.point(0)[0], 0.0);
        ASSERT_GT(both.point(both.size() - 1)[0], 0.0);
    }
}

TEST(Catalog, CubeRootFixedSets) {
    const auto sc = build_scenario("cube-root");
    const auto& f = std::get<MultiMap>(sc.system);
    for (const auto& a : sc.expected_attractors) EXPECT_LE(hausdorff(f.apply(a, sc.tolerances.h), a), sc.tolerances.h);
}

TEST(Catalog, CantorContractionRatio) {
    const auto sc = build_scenario("cantor");
    ASSERT_TRUE(sc.contraction_ratio.has_value());
    EXPECT_DOUBLE_EQ(*sc.contraction_ratio, 1.0 / 3.0);
    // sampled pairwise ratios never exceed it and come close to it
    const auto& f = std::get<MultiMap>(sc.system);
    Rng rng(2);
    double best = 0.0;
    for (int t = 0; t < 2000; ++t) {
        const Point x{rng.uniform()}, y{rng.uniform()};
        if (x == y) continue;
        best = std::max(best, witness_ratio(f, x, y));
    }
    EXPECT_LE(best, 1.0 / 3.0 + 1e-12);
    EXPECT_GE(best, 1.0 / 3.0 - 1e-9);
    EXPECT_DOUBLE_EQ(*build_scenario("sierpinski").contraction_ratio, 0.5);
}

TEST(Catalog, OperatorKinds) {
    EXPECT_TRUE(build_scenario("circle-rotation").generated_by_multimap());
    const auto g = build_scenario("interval-g");
    EXPECT_FALSE(g.generated_by_multimap());
    EXPECT_FALSE(g.expect_stable);
    EXPECT_EQ(std::get<MultiMap>(build_scenario("circle-rotation").system).branches().size(), 2u);
}

TEST(Catalog, ExpectedAttractorsAreNearlyFixed) {
    for (const auto& name : scenario_names()) {
        const auto sc = build_scenario(name);
        const double h = sc.tolerances.h;
        sc.visit([&](const auto& op) {
            for (const auto& a : sc.expected_attractors)
                EXPECT_LE(hausdorff_fast(op.apply(a, h), a), sc.tolerances.attractor_match) << name;
        });
    }
}

TEST(PlanarRotation, LimitsStayOnTheirCircles) {
    const auto demo = planar_rotation_window({0.5, 1.0, 1.5}, 2000, 0.0);
    ASSERT_EQ(demo.limits.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < demo.limits[i].size(); ++k) {
            const auto p = demo.limits[i].point(k);
            ASSERT_NEAR(std::hypot(p[0], p[1]), demo.radii[i], 1e-9);
        }
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) EXPECT_NEAR(demo.spread[i][j], std::fabs(demo.radii[i] - demo.radii[j]), 0.01);
    }
    EXPECT_THROW(planar_rotation_window({}, 10, 0.0), std::invalid_argument);
}
