#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperdyn/analysis.hpp"
#include "hyperdyn/io.hpp"
#include "hyperdyn/scenarios.hpp"

namespace hyperdyn::cli {

enum ExitCode : int { ok = 0, usage_error = 1, expectation_mismatch = 2 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Emit {
    bool json = true;
    bool csv = true;
    bool pgm = false;
    bool svg = false;
};

/// Unset optionals fall back to the scenario's tolerances.
struct RunConfig {
    std::string scenario;
    std::optional<Json> system;  // inline space + branches + initial set
    std::optional<double> h;
    std::optional<double> tol;
    std::optional<std::size_t> n_max;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> samples;
    std::optional<std::vector<double>> epsilons;
    std::optional<std::vector<double>> deltas;
    std::uint64_t seed = 0;
    std::string out = "out";
    Emit emit;
    std::set<std::string> probes{"attractor", "basins", "stability", "witness", "janos"};
};

inline const std::vector<std::string>& probe_names() {
    static const std::vector<std::string> names{"attractor", "basins", "stability", "witness", "janos"};
    return names;
}

inline Emit parse_emit(const std::string& list) {
    Emit e{false, false, false, false};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "json") e.json = true;
        else if (item == "csv") e.csv = true;
        else if (item == "pgm") e.pgm = true;
        else if (item == "svg") e.svg = true;
        else if (!item.empty()) throw UsageError("unknown --emit format '" + item + "' (json, csv, pgm, svg)");
    }
    return e;
}

namespace detail {

inline std::size_t line_at(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

inline std::string where(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? std::string() : "line " + std::to_string(line_at(text, pos)) + ": ";
}

inline Branch branch_from_json(const Json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "affine")
        return AffineBranch{j.at("matrix").get<std::vector<double>>(), j.at("offset").get<std::vector<double>>()};
    if (type == "power") return PowerBranch{j.at("exponent").get<double>()};
    if (type == "rotation") return RotationBranch{j.value("alpha", irrational_rotation_angle)};
    if (type == "identity") return IdentityBranch{};
    throw std::invalid_argument("unknown branch type '" + type + "' (affine, power, rotation, identity)");
}

}  // namespace detail

/// Reads a JSON config. Problems are reported with the line they come from.
inline RunConfig config_from_json_text(const std::string& text, RunConfig cfg = {}) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw UsageError("config line " + std::to_string(detail::line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                         ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw UsageError("config line 1: top level must be an object");
    static const std::set<std::string> known{"scenario", "system", "h",    "tol",  "n_max", "horizon", "samples",
                                             "epsilons", "deltas", "seed", "out",  "emit",  "probes"};
    std::string key;
    try {
        for (const auto& [k, v] : j.items()) {
            key = k;
            if (!known.count(k)) throw std::invalid_argument("unknown key");
            if (k == "scenario") cfg.scenario = v.get<std::string>();
            else if (k == "system") {
                if (!v.is_object()) throw std::invalid_argument("must be an object");
                cfg.system = v;
            } else if (k == "h") cfg.h = v.get<double>();
            else if (k == "tol") cfg.tol = v.get<double>();
            else if (k == "n_max") cfg.n_max = v.get<std::size_t>();
            else if (k == "horizon") cfg.horizon = v.get<std::size_t>();
            else if (k == "samples") cfg.samples = v.get<std::size_t>();
            else if (k == "epsilons") cfg.epsilons = v.get<std::vector<double>>();
            else if (k == "deltas") cfg.deltas = v.get<std::vector<double>>();
            else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (k == "out") cfg.out = v.get<std::string>();
            else if (k == "emit") {
                std::string list;
                for (const auto& e : v) list += e.get<std::string>() + ",";
                cfg.emit = parse_emit(list);
            } else if (k == "probes") {
                cfg.probes.clear();
                for (const auto& p : v) {
                    const auto name = p.get<std::string>();
                    if (std::find(probe_names().begin(), probe_names().end(), name) == probe_names().end())
                        throw std::invalid_argument("unknown probe '" + name + "'");
                    cfg.probes.insert(name);
                }
            }
        }
    } catch (const std::exception& e) {
        throw UsageError("config " + detail::where(text, key) + "\"" + key + "\": " + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    return config_from_json_text(text, std::move(cfg));
}

/// Scenario named in the config, or one assembled from the inline system.
inline Scenario resolve_scenario(const RunConfig& cfg) {
    if (cfg.system) {
        const Json& sys = *cfg.system;
        try {
            auto space = make_space(space_from_json(sys.at("space")));
            std::vector<Branch> branches;
            for (const auto& b : sys.at("branches")) branches.push_back(detail::branch_from_json(b));
            MultiMap f(space, std::move(branches), sys.value("name", std::string("inline")));
            std::vector<double> flat;
            if (sys.contains("initial")) {
                for (const auto& p : sys.at("initial"))
                    for (const auto& x : p) flat.push_back(x.get<double>());
            }
            auto initial = flat.empty() ? grid_net(space, 0.1) : CompactSet::from_flat(space, std::move(flat));
            Scenario sc{f.name(), space, std::move(f), std::move(initial), {}, 0, {}, {}, {}, true, {}, {}, {}, {}};
            sc.notes = "Inline multivalued map from the run configuration. Continuity of the branches is assumed.";
            sc.janos_pair = [space](Rng& rng) {
                return std::pair{hyperdyn::detail::random_cloud_in(space, rng, 3),
                                 hyperdyn::detail::random_cloud_in(space, rng, 3)};
            };
            sc.tolerances.janos_horizon = 4;
            sc.tolerances.janos_pairs = 10;
            return sc;
        } catch (const std::exception& e) {
            throw UsageError(std::string("config \"system\": ") + e.what());
        }
    }
    if (cfg.scenario.empty()) throw UsageError("no scenario given (use --scenario or a config with \"scenario\")");
    try {
        return build_scenario(cfg.scenario);
    } catch (const NotFound& e) {
        throw UsageError(e.what());
    }
}

struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

namespace detail {

inline void put(const RunConfig& cfg, const std::string& name, const std::string& content, std::ostream& log) {
    write_file((std::filesystem::path(cfg.out) / name).string(), content);
    log << "  wrote " << name << "\n";
}

inline Json checks_json(const std::vector<Check>& checks) {
    Json arr = Json::array();
    for (const auto& c : checks) arr.push_back(Json{{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return arr;
}

}  // namespace detail

/// Runs the enabled probes and writes their reports under cfg.out.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
    Scenario sc = resolve_scenario(cfg);
    auto& tl = sc.tolerances;
    if (cfg.h) tl.h = *cfg.h;
    if (cfg.tol) tl.tol = *cfg.tol;
    if (cfg.n_max) tl.n_max = *cfg.n_max;
    if (cfg.horizon) tl.horizon = *cfg.horizon;
    if (cfg.samples) tl.samples = *cfg.samples;
    if (cfg.epsilons) tl.epsilons = *cfg.epsilons;
    if (cfg.deltas) tl.deltas = *cfg.deltas;
    if (!(tl.h > 0.0)) throw UsageError("h must be > 0");
    if (!(tl.tol > 0.0)) throw UsageError("tol must be > 0");
    if (tl.n_max < 1) throw UsageError("n_max must be >= 1");
    if (tl.samples < 1) throw UsageError("samples must be >= 1");
    if (tl.epsilons.empty() || tl.deltas.empty()) throw UsageError("epsilon and delta grids must be nonempty");
    for (double e : tl.epsilons)
        if (!(e > 0.0)) throw UsageError("epsilons must be > 0");
    for (double d : tl.deltas)
        if (!(d > 0.0)) throw UsageError("deltas must be > 0");

    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out + ": " + ec.message());

    const auto has = [&](const char* p) { return cfg.probes.count(p) > 0; };
    std::vector<Check> checks;
    log << "scenario " << sc.name << " (h=" << format_double(tl.h) << ", seed=" << cfg.seed << ")\n";

    std::optional<CompactSet> attractor;
    std::optional<CompactSet> trajectory_first;
    sc.visit([&](const auto& op) {
        if (has("attractor")) {
            log << "attractor search\n";
            const auto rep = find_attractor(op, sc.initial, tl.tol, tl.n_max, tl.h);
            log << "  " << to_string(rep.status) << " after " << rep.steps << " steps, residual "
                << format_double(rep.residual) << "\n";
            attractor = rep.attractor;
            std::optional<CompactSet> ref;
            if (!sc.expected_attractors.empty()) {
                ref = sc.expected_attractors[sc.default_expected];
                // a coarser grid than the catalog default moves the snapped attractor by up to ~h
                const double allowed = std::max(tl.attractor_match, 2.0 * tl.h);
                const double d = hausdorff_fast(rep.attractor, *ref);
                checks.push_back({"attractor", rep.converged && d <= allowed,
                                  "d_H to expected " + format_double(d) + ", allowed " + format_double(allowed)});
            }
            if (cfg.emit.json) detail::put(cfg, "attractor.json", to_json(rep).dump(2) + "\n", log);
            if (cfg.emit.csv) detail::put(cfg, "attractor.csv", set_to_csv(rep.attractor), log);
            if (cfg.emit.csv || cfg.emit.svg) {
                const auto traj = iterate(op, sc.initial, std::max<std::size_t>(1, rep.steps), tl.h, ref);
                if (cfg.emit.csv) detail::put(cfg, "trajectory.csv", to_csv(traj), log);
                if (cfg.emit.svg && sc.space->dimension() <= 2) {
                    std::vector<CompactSet> layers;
                    const std::size_t n = std::min<std::size_t>(traj.sets.size(), 6);
                    for (std::size_t k = 0; k < n; ++k) layers.push_back(traj.sets[k]);
                    detail::put(cfg, "trajectory.svg", render_svg(layers), log);
                }
            }
            if (cfg.emit.pgm && sc.space->dimension() <= 2)
                detail::put(cfg, "attractor.pgm", render_pgm({rep.attractor}), log);
        }

        if (has("basins") && !sc.basin_samplers.empty()) {
            log << "basin classification\n";
            std::vector<CompactSet> samples;
            std::vector<std::size_t> origin;
            for (std::size_t si = 0; si < sc.basin_samplers.size(); ++si) {
                Rng rng = keyed_rng(cfg.seed, 0xba5e0000ULL + si);
                for (std::size_t m = 0; m < tl.basin_samples; ++m) {
                    samples.push_back(sc.basin_samplers[si].draw(rng));
                    origin.push_back(si);
                }
            }
            const auto labels =
                classify_basins(op, sc.expected_attractors, samples, tl.basin_tol, tl.basin_n_max, tl.h);
            std::string csv = "sample,sampler,expected,label,final_defect,steps\n";
            std::size_t correct = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto& sm = sc.basin_samplers[origin[i]];
                const bool hit = labels[i].kind == BasinLabel::Kind::candidate &&
                                 labels[i].index == sm.expected_index && labels[i].final_defect < tl.basin_tol;
                correct += hit;
                csv += std::to_string(i) + "," + sm.name + "," + std::to_string(sm.expected_index) + "," +
                       to_string(labels[i]) + "," + format_double(labels[i].final_defect) + "," +
                       std::to_string(labels[i].steps) + "\n";
            }
            log << "  " << correct << "/" << labels.size() << " classified as expected\n";
            checks.push_back({"basins", correct == labels.size(),
                              std::to_string(correct) + "/" + std::to_string(labels.size()) + " as expected"});
            if (cfg.emit.csv) detail::put(cfg, "basin_labels.csv", csv, log);
        }

        if (has("stability")) {
            log << "stability probe\n";
            const CompactSet target =
                attractor ? *attractor
                          : (sc.expected_attractors.empty() ? sc.initial : sc.expected_attractors[sc.default_expected]);
            StabilityOptions opt{tl.epsilons, tl.deltas, tl.horizon, tl.samples, tl.h, cfg.seed};
            PerturbationSampler sampler;
            sampler.exclusion_margin = tl.sampler_margin;
            StabilityReport rep;
            try {
                rep = probe_stability(op, target, opt, sampler);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            log << to_text(rep);
            const bool stable = rep.verdict == StabilityVerdict::stable_on_evidence;
            if (!cfg.system) checks.push_back({"stability", stable == sc.expect_stable, to_string(rep.verdict)});
            if (cfg.emit.json) detail::put(cfg, "stability.json", to_json(rep).dump(2) + "\n", log);
            if (cfg.emit.csv) detail::put(cfg, "stability.csv", to_csv(rep), log);
        }

        if constexpr (std::is_same_v<std::decay_t<decltype(op)>, MultiMap>) {
            if (has("witness")) {
                log << "non-contraction witness search\n";
                const auto w = find_noncontraction_witness(op, tl.witness_trials, tl.witness_target, cfg.seed);
                log << "  " << (w ? "found, ratio " + format_double(w->ratio) : std::string("none")) << "\n";
                if (sc.expect_witness)
                    checks.push_back({"witness", w.has_value() == *sc.expect_witness,
                                      w ? "ratio " + format_double(w->ratio) : "none found"});
                if (cfg.emit.json)
                    detail::put(cfg, "witness.json", to_json(w, tl.witness_target, tl.witness_trials).dump(2) + "\n",
                                log);
            }
        }

        if (has("janos") && sc.janos_pair) {
            log << "contraction-metric probe\n";
            Rng rng = keyed_rng(cfg.seed, 0x1a05ULL);
            std::vector<std::pair<CompactSet, CompactSet>> pairs;
            for (std::size_t i = 0; i < tl.janos_pairs; ++i) pairs.push_back(sc.janos_pair(rng));
            const double jh = std::is_same_v<std::decay_t<decltype(op)>, MultiMap> ? tl.janos_h : tl.h;
            const auto d = janos_metric_probe(op, tl.janos_c, pairs, tl.janos_horizon, jh);
            log << "  " << to_string(d.verdict) << "\n";
            if (sc.expect_janos) checks.push_back({"janos", d.verdict == *sc.expect_janos, to_string(d.verdict)});
            if (cfg.emit.json) detail::put(cfg, "janos.json", to_json(d).dump(2) + "\n", log);
        }
    });

    bool all = true;
    for (const auto& c : checks) all = all && c.passed;
    if (cfg.emit.json) {
        Json j;
        j["name"] = sc.name;
        j["notes"] = sc.notes;
        j["generated_by_multimap"] = sc.generated_by_multimap();
        j["assumptions"] = Json::array({"branches are continuous (not verified)",
                                        "stability results are sampled evidence over a finite horizon"});
        j["space"] = space_to_json(*sc.space);
        j["parameters"] = Json{{"h", tl.h},
                               {"tol", tl.tol},
                               {"n_max", tl.n_max},
                               {"horizon", tl.horizon},
                               {"samples", tl.samples},
                               {"epsilons", tl.epsilons},
                               {"deltas", tl.deltas},
                               {"seed", cfg.seed}};
        if (sc.contraction_ratio) j["contraction_ratio"] = *sc.contraction_ratio;
        Json expected = Json::array();
        for (const auto& a : sc.expected_attractors) expected.push_back(a.size() <= 16 ? set_to_json(a) : Json(a.size()));
        j["expected_attractors"] = expected;
        j["checks"] = detail::checks_json(checks);
        detail::put(cfg, "scenario.json", j.dump(2) + "\n", log);
    }
    for (const auto& c : checks)
        log << (c.passed ? "ok       " : "MISMATCH ") << c.name << ": " << c.detail << "\n";
    return all ? ok : expectation_mismatch;
}

/// Command-line front end. Flags override values from --config.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& log = std::cerr) {
    CLI::App app{"Dynamics of multivalued maps on hyperspaces of compact sets"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", "hyperdyn 0.1.0");
    std::string scenario, config_path, out_dir, emit;
    std::optional<double> h, tol;
    std::optional<std::size_t> n_max, horizon, samples;
    std::optional<std::uint64_t> seed;
    bool list = false;
    app.add_option("--scenario", scenario, "Scenario name (see --list-scenarios)");
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--h", h, "Grid resolution");
    app.add_option("--tol", tol, "Convergence tolerance");
    app.add_option("--n-max", n_max, "Maximum iterations for the attractor search");
    app.add_option("--horizon", horizon, "Stability horizon N");
    app.add_option("--samples", samples, "Stability samples M per delta");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--emit", emit, "Comma list of json, csv, pgm, svg");
    app.add_flag("--list-scenarios", list, "Print the scenario catalog");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, log) == 0 ? ok : usage_error;
    }
    if (list) {
        for (const auto& name : scenario_names()) out << name << "\n";
        return ok;
    }
    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path, cfg);
        if (!scenario.empty()) {
            cfg.scenario = scenario;
            cfg.system.reset();
        }
        if (h) cfg.h = h;
        if (tol) cfg.tol = tol;
        if (n_max) cfg.n_max = n_max;
        if (horizon) cfg.horizon = horizon;
        if (samples) cfg.samples = samples;
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (!emit.empty()) cfg.emit = parse_emit(emit);
        return run(cfg, log);
    } catch (const UsageError& e) {
        log << "error: " << e.what() << "\n";
        return usage_error;
    } catch (const IoError& e) {
        log << "error: " << e.what() << "\n";
        return usage_error;
    }
}

}  // namespace hyperdyn::cli
