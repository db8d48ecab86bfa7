#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperdyn/dynamics.hpp"
#include "hyperdyn/hausdorff.hpp"
#include "hyperdyn/random.hpp"

namespace hyperdyn {

// ---------------------------------------------------------------------------
// Attractor search

enum class AttractorStatus { converged, max_steps, cycle_detected };

inline const char* to_string(AttractorStatus s) {
    switch (s) {
        case AttractorStatus::converged: return "converged";
        case AttractorStatus::max_steps: return "max-steps";
        case AttractorStatus::cycle_detected: return "cycle-detected";
    }
    return "?";
}

struct AttractorReport {
    CompactSet attractor;
    double residual = 0.0;  // last d_H(A_n, A_{n+1})
    std::size_t steps = 0;
    bool converged = false;
    double fixed_point_defect = 0.0;  // d_H(F(A*), A*)
    AttractorStatus status = AttractorStatus::max_steps;
    std::size_t cycle_period = 0;
    std::vector<double> residuals;
};

/// Sets seen over the last `capacity` steps, keyed by hash, for exact
/// recurrence checks.
class RecurrenceWindow {
public:
    explicit RecurrenceWindow(std::size_t capacity = 20) : capacity_(capacity) {}

    /// Steps back to an identical earlier set, or 0.
    std::size_t period_of(const CompactSet& s) const {
        const auto h = s.hash();
        for (std::size_t i = entries_.size(); i-- > 0;) {
            if (entries_[i].hash == h && entries_[i].set == s) return entries_.size() - i;
        }
        return 0;
    }

    void push(const CompactSet& s) {
        entries_.push_back({s.hash(), s});
        if (entries_.size() > capacity_) entries_.pop_front();
    }

private:
    struct Entry {
        std::uint64_t hash;
        CompactSet set;
    };
    std::size_t capacity_;
    std::deque<Entry> entries_;
};

/// Iterate until the residual stays <= tol for three consecutive steps, the
/// set stops changing, a cycle shows up, or n_max steps pass.
template <SetOperator Op>
AttractorReport find_attractor(const Op& op, const CompactSet& b0, double tol, std::size_t n_max, double h) {
    if (!(tol > 0.0)) throw std::invalid_argument("find_attractor: tol must be > 0");
    if (n_max < 1) throw std::invalid_argument("find_attractor: n_max must be >= 1");
    AttractorReport rep{b0, 0.0, 0, false, 0.0, AttractorStatus::max_steps, 0, {}};
    RecurrenceWindow window(20);
    window.push(b0);
    CompactSet cur = b0;
    std::size_t below = 0;
    for (std::size_t step = 1; step <= n_max; ++step) {
        CompactSet next = op.apply(cur, h);
        const double r = hausdorff_fast(cur, next);
        rep.residuals.push_back(r);
        rep.residual = r;
        rep.steps = step;
        if (next == cur) {
            rep.converged = true;
            rep.status = AttractorStatus::converged;
            break;
        }
        below = r <= tol ? below + 1 : 0;
        if (below >= 3) {
            cur = std::move(next);
            rep.converged = true;
            rep.status = AttractorStatus::converged;
            break;
        }
        if (r > tol) {
            if (const auto p = window.period_of(next); p > 0) {
                cur = std::move(next);
                rep.status = AttractorStatus::cycle_detected;
                rep.cycle_period = p;
                break;
            }
        }
        window.push(next);
        cur = std::move(next);
    }
    rep.attractor = cur;
    rep.fixed_point_defect = hausdorff_fast(op.apply(cur, h), cur);
    return rep;
}

// ---------------------------------------------------------------------------
// Basin classification

struct BasinLabel {
    enum class Kind { candidate, divergent, ambiguous };
    Kind kind = Kind::ambiguous;
    std::size_t index = 0;  // candidate index when kind == candidate
    double final_defect = 0.0;
    std::size_t steps = 0;

    bool operator==(const BasinLabel& o) const { return kind == o.kind && (kind != Kind::candidate || index == o.index); }
};

inline std::string to_string(const BasinLabel& l) {
    switch (l.kind) {
        case BasinLabel::Kind::candidate: return std::to_string(l.index);
        case BasinLabel::Kind::divergent: return "divergent";
        case BasinLabel::Kind::ambiguous: return "ambiguous";
    }
    return "?";
}

/// Label each sample by the unique candidate its orbit settles within tol of.
template <SetOperator Op>
std::vector<BasinLabel> classify_basins(const Op& op, const std::vector<CompactSet>& candidates,
                                        const std::vector<CompactSet>& samples, double tol, std::size_t n_max,
                                        double h) {
    if (candidates.empty()) throw std::invalid_argument("classify_basins: no candidates");
    std::vector<BasinLabel> labels;
    labels.reserve(samples.size());
    for (const auto& sample : samples) {
        const auto rep = find_attractor(op, sample, tol, n_max, h);
        BasinLabel label;
        label.final_defect = rep.fixed_point_defect;
        label.steps = rep.steps;
        if (!rep.converged) {
            label.kind = BasinLabel::Kind::divergent;
        } else {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (hausdorff_fast(rep.attractor, candidates[i]) <= tol) {
                    ++hits;
                    label.index = i;
                }
            }
            label.kind = hits == 1 ? BasinLabel::Kind::candidate : BasinLabel::Kind::ambiguous;
        }
        labels.push_back(label);
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Stability probe

/// Random sets B with d_H(B, center) < delta: the whole set is shifted by a
/// common offset and each point jittered on top of it, moving every point by
/// less than delta/2. Some points with a close kept neighbor are dropped and
/// a few jittered copies are added.
struct PerturbationSampler {
    double jitter_fraction = 0.45;  // jitter radius as a fraction of delta, < 1/2
    double drop_probability = 0.3;
    std::size_t max_added = 8;
    double exclusion_margin = 0.0;  // keep points this far from excluded regions

    CompactSet operator()(const CompactSet& center, double delta, Rng& rng) const {
        const Space& s = center.space();
        const double r = jitter_fraction * delta;
        const std::size_t n = center.size();
        const std::size_t d = center.dim();
        std::vector<char> dropped(n, 0), anchor(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (anchor[i] || !rng.bernoulli(drop_probability)) continue;
            // only neighbors in canonical order are considered
            for (std::size_t j : {i + 1, i - 1}) {
                if (j >= n || dropped[j]) continue;
                if (s.distance_unchecked(center.point(i), center.point(j)) < r) {
                    dropped[i] = 1;
                    anchor[j] = 1;
                    break;
                }
            }
        }
        const double half = 0.4995 * r;
        const double step = s.kind() == SpaceKind::euclidean ? half / std::sqrt(static_cast<double>(d)) : half;
        Point shift(d);
        for (auto& x : shift) x = rng.uniform(-step, step);
        std::vector<double> flat;
        flat.reserve((n + max_added) * d);
        Point p(d);
        for (std::size_t i = 0; i < n; ++i) {
            if (dropped[i]) continue;
            jitter(s, center.point(i), shift, step, rng, p);
            flat.insert(flat.end(), p.begin(), p.end());
        }
        const std::size_t extra = max_added == 0 ? 0 : rng.index(max_added + 1);
        for (std::size_t k = 0; k < extra; ++k) {
            jitter(s, center.point(rng.index(n)), shift, step, rng, p);
            flat.insert(flat.end(), p.begin(), p.end());
        }
        auto b = CompactSet::from_flat(center.space_ptr(), std::move(flat), center.resolution());
        if (!(hausdorff_fast(b, center) < delta))
            throw std::logic_error("PerturbationSampler: sample is not within delta of the center");
        return b;
    }

private:
    void jitter(const Space& s, PointView c, const Point& shift, double step, Rng& rng, Point& out) const {
        for (int attempt = 0; attempt < 32; ++attempt) {
            if (s.is_circle()) {
                out[0] = normalize_angle(c[0] + shift[0] + rng.uniform(-step, step));
            } else {
                for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] + shift[k] + rng.uniform(-step, step);
                s.clamp(out);
            }
            if (s.in_domain(out) && s.distance_to_exclusions(out) >= exclusion_margin) return;
        }
        std::copy(c.begin(), c.end(), out.begin());
    }
};

using SetSampler = std::function<CompactSet(const CompactSet&, double, Rng&)>;

struct StabilityRow {
    double epsilon = 0.0;
    std::optional<double> delta;  // largest passing delta, if any
    std::size_t samples = 0;
    std::size_t horizon = 0;
    double worst_excursion = 0.0;  // max over samples of max_n d_H(F^n B, A*) at the reported (or smallest) delta
};

enum class StabilityVerdict { stable_on_evidence, instability_witness };

inline const char* to_string(StabilityVerdict v) {
    return v == StabilityVerdict::stable_on_evidence ? "stable-on-evidence" : "instability-witness";
}

struct InstabilityWitness {
    double epsilon = 0.0;
    double delta = 0.0;
    CompactSet start;
    std::vector<double> distances;  // d_H(F^n B, A*) for n = 0.. exit
    std::size_t exit_step = 0;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    StabilityVerdict verdict = StabilityVerdict::stable_on_evidence;
    std::optional<InstabilityWitness> witness;
    bool generated_by_multimap = true;
};

struct StabilityOptions {
    std::vector<double> epsilons;
    std::vector<double> deltas;
    std::size_t horizon = 500;
    std::size_t samples = 50;
    double h = 0.0;
    std::uint64_t seed = 0;
};

/// Empirical epsilon-delta table. Orbits are followed for at most `horizon`
/// steps and abandoned once they reach the largest epsilon or revisit a set.
template <SetOperator Op>
StabilityReport probe_stability(const Op& op, const CompactSet& target, const StabilityOptions& opt,
                                const SetSampler& sampler = PerturbationSampler{}) {
    if (opt.epsilons.empty() || opt.deltas.empty()) throw std::invalid_argument("probe_stability: empty grid");
    if (opt.samples < 1) throw std::invalid_argument("probe_stability: need at least one sample");
    for (double e : opt.epsilons)
        if (!(e > 0.0)) throw std::invalid_argument("probe_stability: epsilons must be > 0");
    for (double d : opt.deltas)
        if (!(d > 0.0)) throw std::invalid_argument("probe_stability: deltas must be > 0");
    for (double e : opt.epsilons)
        if (std::none_of(opt.deltas.begin(), opt.deltas.end(), [e](double d) { return d <= e; }))
            throw std::invalid_argument("probe_stability: every epsilon needs a delta <= epsilon");

    std::vector<double> eps = opt.epsilons;
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    std::vector<double> deltas = opt.deltas;
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    const double eps_max = eps.back();

    struct Run {
        CompactSet start;
        std::vector<double> distances;
        double max_distance;
    };
    // orbits for one delta are only computed when some epsilon needs them
    std::vector<std::optional<std::vector<Run>>> runs(deltas.size());
    auto runs_for = [&](std::size_t di) -> const std::vector<Run>& {
        if (runs[di]) return *runs[di];
        auto& out = runs[di].emplace();
        for (std::size_t m = 0; m < opt.samples; ++m) {
            Rng rng = keyed_rng(opt.seed, di * opt.samples + m);
            CompactSet b = sampler(target, deltas[di], rng);
            Run run{b, {}, 0.0};
            run.distances.push_back(hausdorff_fast(b, target));
            run.max_distance = run.distances.back();
            RecurrenceWindow window(20);
            window.push(b);
            CompactSet cur = std::move(b);
            for (std::size_t n = 1; n <= opt.horizon && run.max_distance < eps_max; ++n) {
                CompactSet next = op.apply(cur, opt.h);
                const double dist = hausdorff_fast(next, target);
                run.distances.push_back(dist);
                run.max_distance = std::max(run.max_distance, dist);
                // a revisited set means the rest of the orbit has been seen
                if (window.period_of(next) > 0) break;
                window.push(next);
                cur = std::move(next);
            }
            out.push_back(std::move(run));
        }
        return out;
    };

    StabilityReport rep;
    rep.generated_by_multimap = op.generated_by_multimap();
    for (double e : eps) {
        StabilityRow row{e, std::nullopt, opt.samples, opt.horizon, 0.0};
        std::optional<std::size_t> first_fail_idx;
        for (std::size_t di = 0; di < deltas.size(); ++di) {
            if (deltas[di] > e) continue;
            double worst = 0.0;
            for (const auto& run : runs_for(di)) worst = std::max(worst, run.max_distance);
            row.worst_excursion = worst;
            if (worst < e) {
                row.delta = deltas[di];
                break;
            }
            first_fail_idx = di;
        }
        if (!row.delta) {
            rep.verdict = StabilityVerdict::instability_witness;
            if (!rep.witness && first_fail_idx) {
                const std::size_t di = *first_fail_idx;  // smallest eligible delta
                for (const auto& run : runs_for(di)) {
                    if (run.max_distance >= e) {
                        InstabilityWitness w{e, deltas[di], run.start, run.distances, 0};
                        for (std::size_t k = 0; k < run.distances.size(); ++k)
                            if (run.distances[k] >= e) {
                                w.exit_step = k;
                                break;
                            }
                        rep.witness = std::move(w);
                        break;
                    }
                }
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Non-contraction witness

struct Witness {
    Point x;
    Point x_prime;
    double ratio = 0.0;  // d_H(F(x), F(x')) / d(x, x')
    std::string metric;
};

inline double witness_ratio(const MultiMap& f, PointView x, PointView xp) {
    return hausdorff(f.evaluate(x), f.evaluate(xp)) / f.space().distance(x, xp);
}

/// Searches point pairs for a Lipschitz ratio of the multimap >= target.
/// Even trials use close pairs at scales 1e-1 .. 1e-6, odd trials use
/// independent uniform pairs. Returns the best pair if it reaches target.
inline std::optional<Witness> find_noncontraction_witness(const MultiMap& f, std::size_t trials, double target,
                                                          std::uint64_t seed = 0) {
    if (trials < 1) throw std::invalid_argument("find_noncontraction_witness: trials must be >= 1");
    const Space& s = f.space();
    Rng rng(seed);
    auto draw = [&]() {
        Point p(s.coord_count());
        for (int attempt = 0; attempt < 1000; ++attempt) {
            if (s.is_circle())
                p[0] = rng.uniform(0.0, two_pi);
            else
                for (std::size_t k = 0; k < p.size(); ++k) p[k] = rng.uniform(s.lower()[k], s.upper()[k]);
            if (s.in_domain(p)) return p;
        }
        throw EmptyDomain("find_noncontraction_witness: could not sample the domain");
    };
    std::optional<Witness> best;
    for (std::size_t t = 0; t < trials; ++t) {
        Point x = draw(), xp;
        if (t % 2 == 0) {
            const double scale = std::pow(10.0, -static_cast<double>(1 + (t / 2) % 6));
            xp = x;
            if (s.is_circle()) {
                xp[0] = normalize_angle(x[0] + scale);
            } else {
                for (auto& v : xp) v += scale * rng.uniform(-1.0, 1.0);
                s.clamp(xp);
            }
        } else {
            xp = draw();
        }
        if (!s.in_domain(xp) || xp == x) continue;
        const double ratio = witness_ratio(f, x, xp);
        if (!best || ratio > best->ratio) best = Witness{x, xp, ratio, std::string(to_string(s.kind()))};
    }
    if (best && best->ratio >= target) return best;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Truncated contraction-metric probe

enum class JanosVerdict { geometric_decay, non_geometric };

inline const char* to_string(JanosVerdict v) {
    return v == JanosVerdict::geometric_decay ? "geometric-decay" : "non-geometric";
}

struct JanosPair {
    double hausdorff0 = 0.0;
    std::vector<double> weighted;  // c^-k d_H(F^k A, F^k B), k = 0..2N
    double value = 0.0;            // max over k <= N
    std::size_t argmax = 0;
    double value_doubled = 0.0;  // max over k <= 2N
    std::size_t argmax_doubled = 0;
};

struct JanosDiagnosis {
    double c = 0.0;
    std::size_t horizon = 0;
    std::vector<JanosPair> pairs;
    JanosVerdict verdict = JanosVerdict::geometric_decay;
};

/// D_c(A, B) = max_{0<=k<=N} c^-k d_H(F^k A, F^k B), evaluated at N and 2N.
/// Geometric decay: every argmax stays below N/2 and doubling N leaves the
/// value unchanged.
template <SetOperator Op>
JanosDiagnosis janos_metric_probe(const Op& op, double c, const std::vector<std::pair<CompactSet, CompactSet>>& pairs,
                                  std::size_t horizon, double h) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("janos_metric_probe: c must lie in (0, 1)");
    if (horizon < 1) throw std::invalid_argument("janos_metric_probe: N must be >= 1");
    JanosDiagnosis diag{c, horizon, {}, JanosVerdict::geometric_decay};
    for (const auto& [a0, b0] : pairs) {
        JanosPair jp;
        CompactSet a = a0, b = b0;
        for (std::size_t k = 0; k <= 2 * horizon; ++k) {
            if (k > 0) {
                a = op.apply(a, h);
                b = op.apply(b, h);
            }
            const double dist = hausdorff_fast(a, b);
            if (k == 0) jp.hausdorff0 = dist;
            jp.weighted.push_back(dist * std::pow(c, -static_cast<double>(k)));
        }
        for (std::size_t k = 0; k <= 2 * horizon; ++k) {
            const double w = jp.weighted[k];
            if (k <= horizon && w > jp.value) {
                jp.value = w;
                jp.argmax = k;
            }
            if (w > jp.value_doubled) {
                jp.value_doubled = w;
                jp.argmax_doubled = k;
            }
        }
        const bool early = 2 * jp.argmax < horizon;
        const bool stable = jp.value_doubled <= jp.value * (1.0 + 1e-12);
        if (!(early && stable)) diag.verdict = JanosVerdict::non_geometric;
        diag.pairs.push_back(std::move(jp));
    }
    return diag;
}

}  // namespace hyperdyn
