#include <gtest/gtest.h>

#include <cmath>

#include "hyperdyn/analysis.hpp"
#include "test_support.hpp"

using namespace hyperdyn;
using namespace hyperdyn::testing;

namespace {

SpacePtr punctured() { return make_space(Space::interval(-1.0, 1.0, {Exclusion{{0.0}, 0.0}})); }

// x -> min(1, 2x): repels from {0}, not a multimap Hutchinson operator here.
struct Doubling {
    SpacePtr space;
    CompactSet apply(const CompactSet& a, double h) const {
        std::vector<double> xs;
        for (double x : a.coords()) xs.push_back(std::min(1.0, 2.0 * x));
        auto out = CompactSet::from_flat(space, xs);
        return h > 0.0 ? snap_to_grid(out, h) : out;
    }
    bool generated_by_multimap() const { return false; }
    std::string name() const { return "doubling"; }
};

}  // namespace

TEST(FindAttractor, CantorMatchesLevelEightNet) {
    const auto s = unit_interval();
    const double h = 1e-4;
    const auto rep = find_attractor(ifs::cantor(s), grid_net(s, h), 1e-3, 200, h);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.status, AttractorStatus::converged);
    EXPECT_LE(rep.residual, 1e-3);
    EXPECT_LE(brute_hausdorff(rep.attractor, cantor_level_net(s, 8, h)), 2e-3);
}

TEST(FindAttractor, CubeRootFromNegativeHalf) {
    const auto s = punctured();
    const double h = 1e-4;
    const auto rep = find_attractor(ifs::cube_root(s), CompactSet::from_flat(s, {-0.5}), 1e-3, 100, h);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(hausdorff(rep.attractor, CompactSet::from_flat(s, {-1.0})), 1e-3);
}

TEST(FindAttractor, ReflectionCycles) {
    const auto s = unit_interval();
    const MultiMap flip(s, {AffineBranch{{-1.0}, {1.0}}});
    const auto rep = find_attractor(flip, CompactSet::from_flat(s, {0.2}), 1e-3, 50, 0.0);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.status, AttractorStatus::cycle_detected);
    EXPECT_EQ(rep.cycle_period, 2u);
}

TEST(FindAttractor, MaxStepsWithoutConvergence) {
    const auto s = circle_space();
    const auto rep = find_attractor(ifs::circle_rotation(s), CompactSet::from_flat(s, {1.0}), 1e-6, 5, 0.0);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.status, AttractorStatus::max_steps);
    EXPECT_EQ(rep.steps, 5u);
}

TEST(FindAttractor, RejectsBadArguments) {
    const auto s = unit_interval();
    const auto f = ifs::cantor(s);
    const auto b = CompactSet::from_flat(s, {0.5});
    EXPECT_THROW(find_attractor(f, b, 0.0, 10, 0.0), std::invalid_argument);
    EXPECT_THROW(find_attractor(f, b, 1e-3, 0, 0.0), std::invalid_argument);
}

TEST(FindAttractorProperties, ConvergedReportsAreConsistent) {
    const auto s = unit_square();
    const auto f = ifs::sierpinski(s);
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        const double h = 0.01;
        const double tol = 0.02;
        const auto rep = find_attractor(f, random_cloud(s, rng, 1 + rng.index(20)), tol, 100, h);
        ASSERT_TRUE(rep.converged);
        ASSERT_LE(rep.residual, tol);
        ASSERT_LE(rep.fixed_point_defect, rep.residual + 2.0 * h * std::sqrt(2.0));
        ASSERT_EQ(rep.residuals.size(), rep.steps);
    }
}

TEST(ClassifyBasins, CubeRootSides) {
    const auto s = punctured();
    const auto f = ifs::cube_root(s);
    const std::vector<CompactSet> cands{CompactSet::from_flat(s, {-1.0}), CompactSet::from_flat(s, {1.0}),
                                        CompactSet::from_flat(s, {-1.0, 1.0})};
    const std::vector<CompactSet> samples{CompactSet::from_flat(s, {-0.3, -0.01}), CompactSet::from_flat(s, {0.002}),
                                          CompactSet::from_flat(s, {-0.9, 0.4})};
    const auto labels = classify_basins(f, cands, samples, 1e-3, 200, 1e-4);
    ASSERT_EQ(labels.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(labels[i].kind, BasinLabel::Kind::candidate);
        EXPECT_EQ(labels[i].index, i);
    }
    EXPECT_THROW(classify_basins(f, {}, samples, 1e-3, 10, 1e-4), std::invalid_argument);
}

TEST(ClassifyBasins, NonConvergingOrbitIsDivergent) {
    const auto s = unit_interval();
    const MultiMap flip(s, {AffineBranch{{-1.0}, {1.0}}});
    const auto labels = classify_basins(flip, {CompactSet::from_flat(s, {0.5})}, {CompactSet::from_flat(s, {0.1})},
                                        1e-3, 20, 0.0);
    EXPECT_EQ(labels[0].kind, BasinLabel::Kind::divergent);
    const auto fixed = classify_basins(flip, {CompactSet::from_flat(s, {0.5})}, {CompactSet::from_flat(s, {0.5})},
                                       1e-3, 20, 0.0);
    EXPECT_EQ(fixed[0].kind, BasinLabel::Kind::candidate);
}

TEST(Sampler, StaysWithinDelta) {
    for (const auto& sp : all_space_kinds()) {
        Rng rng(40);
        const PerturbationSampler sampler;
        for (int t = 0; t < 300; ++t) {
            const auto center = random_cloud(sp, rng, 1 + rng.index(50));
            const double delta = std::pow(10.0, -rng.uniform(0.5, 3.0));
            const auto b = sampler(center, delta, rng);
            ASSERT_LT(brute_hausdorff(b, center), delta) << to_string(sp->kind());
        }
    }
}

TEST(Sampler, KeepsExclusionMargin) {
    const auto s = punctured();
    PerturbationSampler sampler;
    sampler.exclusion_margin = 1e-3;
    Rng rng(3);
    const auto center = CompactSet::from_flat(s, {-0.01, 0.01, 0.5});
    for (int t = 0; t < 200; ++t) {
        const auto b = sampler(center, 0.02, rng);
        for (double x : b.coords()) ASSERT_GE(std::fabs(x), 1e-3);
    }
}

TEST(ProbeStability, CantorIsStableOnEvidence) {
    const auto s = unit_interval();
    const double h = 1e-4;
    const auto f = ifs::cantor(s);
    const auto att = find_attractor(f, grid_net(s, h), 1e-3, 200, h).attractor;
    StabilityOptions opt;
    opt.epsilons = {0.1, 0.05};
    opt.deltas = {0.04, 0.02, 0.01};
    opt.horizon = 50;
    opt.samples = 10;
    opt.h = h;
    const auto rep = probe_stability(f, att, opt);
    EXPECT_EQ(rep.verdict, StabilityVerdict::stable_on_evidence);
    EXPECT_TRUE(rep.generated_by_multimap);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_EQ(rep.rows[0].epsilon, 0.05);
    for (const auto& row : rep.rows) {
        ASSERT_TRUE(row.delta.has_value());
        EXPECT_LE(*row.delta, row.epsilon);
    }
}

TEST(ProbeStability, RepellerYieldsWitness) {
    const auto s = unit_interval();
    const Doubling op{s};
    StabilityOptions opt;
    opt.epsilons = {0.3};
    opt.deltas = {0.1, 0.01};
    opt.horizon = 100;
    opt.samples = 5;
    const auto rep = probe_stability(op, CompactSet::from_flat(s, {0.0}), opt);
    EXPECT_EQ(rep.verdict, StabilityVerdict::instability_witness);
    EXPECT_FALSE(rep.generated_by_multimap);
    ASSERT_TRUE(rep.witness.has_value());
    const auto& w = *rep.witness;
    EXPECT_EQ(w.delta, 0.01);
    EXPECT_LT(w.distances.front(), w.delta);
    EXPECT_GE(w.distances[w.exit_step], w.epsilon);
    // replaying the orbit from the stored start reproduces the distances
    CompactSet cur = w.start;
    for (std::size_t k = 1; k <= w.exit_step; ++k) {
        cur = op.apply(cur, 0.0);
        EXPECT_EQ(hausdorff(cur, CompactSet::from_flat(s, {0.0})), w.distances[k]);
    }
}

TEST(ProbeStability, Deterministic) {
    const auto s = unit_square();
    const auto f = ifs::sierpinski(s);
    const auto att = find_attractor(f, grid_net(s, 0.1), 0.02, 50, 0.01).attractor;
    StabilityOptions opt;
    opt.epsilons = {0.1};
    opt.deltas = {0.05};
    opt.horizon = 10;
    opt.samples = 3;
    opt.h = 0.01;
    opt.seed = 9;
    const auto a = probe_stability(f, att, opt), b = probe_stability(f, att, opt);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    EXPECT_EQ(a.rows[0].delta, b.rows[0].delta);
    EXPECT_EQ(a.rows[0].worst_excursion, b.rows[0].worst_excursion);
}

TEST(ProbeStability, RejectsBadGrids) {
    const auto s = unit_interval();
    const auto f = ifs::cantor(s);
    const auto t = CompactSet::from_flat(s, {0.0, 1.0});
    StabilityOptions opt;
    opt.epsilons = {0.1};
    opt.deltas = {};
    EXPECT_THROW(probe_stability(f, t, opt), std::invalid_argument);
    opt.deltas = {0.2};
    EXPECT_THROW(probe_stability(f, t, opt), std::invalid_argument);
    opt.deltas = {0.05};
    opt.samples = 0;
    EXPECT_THROW(probe_stability(f, t, opt), std::invalid_argument);
}

TEST(ProbeStabilityProperties, DeltaBoundedAndMonotone) {
    const auto s = unit_interval();
    Rng rng(77);
    for (int t = 0; t < 6; ++t) {
        // contraction toward a random point, or the repelling doubling map
        const double c = rng.uniform(0.2, 0.9);
        const double p = rng.uniform(0.0, 1.0);
        const MultiMap f(s, {AffineBranch{{c}, {(1.0 - c) * p}}});
        StabilityOptions opt;
        opt.epsilons = {0.02, 0.05, 0.1, 0.2};
        opt.deltas = {0.15, 0.08, 0.04, 0.01};
        opt.horizon = 30;
        opt.samples = 4;
        opt.h = 1e-3;
        opt.seed = static_cast<std::uint64_t>(t);
        const auto target = CompactSet::from_flat(s, {p});
        for (const auto& rep : {probe_stability(f, target, opt), probe_stability(Doubling{s}, target, opt)}) {
            std::optional<double> prev;
            for (std::size_t i = 0; i < rep.rows.size(); ++i) {
                const auto& row = rep.rows[i];
                if (i > 0) ASSERT_GT(row.epsilon, rep.rows[i - 1].epsilon);
                if (row.delta) {
                    ASSERT_LE(*row.delta, row.epsilon);
                    if (prev) ASSERT_GE(*row.delta, *prev);
                    prev = row.delta;
                } else {
                    ASSERT_FALSE(prev.has_value());
                }
            }
        }
    }
}

TEST(NoncontractionWitness, RotationIsAnIsometryOnPairs) {
    const auto f = ifs::circle_rotation(circle_space());
    const auto w = find_noncontraction_witness(f, 10000, 0.999, 1);
    ASSERT_TRUE(w.has_value());
    EXPECT_GE(w->ratio, 0.999);
    EXPECT_GT(f.space().distance(w->x, w->x_prime), 0.0);
    EXPECT_NEAR(witness_ratio(f, w->x, w->x_prime), w->ratio, 1e-12);
    EXPECT_EQ(w->metric, "circle");
}

TEST(NoncontractionWitness, CantorHasNone) {
    EXPECT_FALSE(find_noncontraction_witness(ifs::cantor(unit_interval()), 5000, 0.9, 2).has_value());
    EXPECT_THROW(find_noncontraction_witness(ifs::cantor(unit_interval()), 0, 0.9), std::invalid_argument);
}

TEST(NoncontractionWitnessProperties, RatiosRecompute) {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto f = t % 2 == 0 ? ifs::sierpinski(unit_square()) : ifs::circle_rotation(circle_space());
        const auto w = find_noncontraction_witness(f, 200, 0.0, rng.next_u64());
        ASSERT_TRUE(w.has_value());
        ASSERT_NEAR(witness_ratio(f, w->x, w->x_prime), w->ratio, 1e-12);
        ASSERT_GT(f.space().distance(w->x, w->x_prime), 0.0);
    }
}

TEST(Janos, CantorDecaysGeometrically) {
    const auto s = unit_interval();
    const auto f = ifs::cantor(s);
    const std::vector<std::pair<CompactSet, CompactSet>> pairs{
        {CompactSet::from_flat(s, {0.0}), CompactSet::from_flat(s, {1.0})},
        {CompactSet::from_flat(s, {0.2, 0.3}), CompactSet::from_flat(s, {0.9})},
    };
    const auto d = janos_metric_probe(f, 0.5, pairs, 6, 0.0);
    EXPECT_EQ(d.verdict, JanosVerdict::geometric_decay);
    ASSERT_EQ(d.pairs.size(), 2u);
    EXPECT_EQ(d.pairs[0].argmax, 0u);
    EXPECT_EQ(d.pairs[0].value, 1.0);
    EXPECT_EQ(d.pairs[0].weighted.size(), 13u);
}

TEST(Janos, RotationIsNonGeometric) {
    const auto s = circle_space();
    const auto f = ifs::circle_rotation(s);
    const auto d = janos_metric_probe(f, 0.9, {{CompactSet::from_flat(s, {0.0}), CompactSet::from_flat(s, {0.5})}}, 64, 0.0);
    EXPECT_EQ(d.verdict, JanosVerdict::non_geometric);
    EXPECT_GT(d.pairs[0].value_doubled, d.pairs[0].value);
}

TEST(Janos, RejectsBadParameters) {
    const auto s = unit_interval();
    const auto f = ifs::cantor(s);
    const std::vector<std::pair<CompactSet, CompactSet>> pairs{{CompactSet::from_flat(s, {0.0}), CompactSet::from_flat(s, {1.0})}};
    EXPECT_THROW(janos_metric_probe(f, 1.0, pairs, 4, 0.0), std::invalid_argument);
    EXPECT_THROW(janos_metric_probe(f, 0.0, pairs, 4, 0.0), std::invalid_argument);
    EXPECT_THROW(janos_metric_probe(f, 0.5, pairs, 0, 0.0), std::invalid_argument);
}

TEST(JanosProperties, DominatesHausdorff) {
    const auto s = unit_square();
    const auto f = ifs::sierpinski(s);
    Rng rng(6);
    std::vector<std::pair<CompactSet, CompactSet>> pairs;
    for (int t = 0; t < 30; ++t) pairs.push_back({random_cloud(s, rng, 1 + rng.index(5)), random_cloud(s, rng, 1 + rng.index(5))});
    const auto d = janos_metric_probe(f, 0.7, pairs, 3, 0.0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        ASSERT_EQ(d.pairs[i].hausdorff0, brute_hausdorff(pairs[i].first, pairs[i].second));
        ASSERT_GE(d.pairs[i].value, d.pairs[i].hausdorff0);
        ASSERT_GE(d.pairs[i].value_doubled, d.pairs[i].value);
    }
}
