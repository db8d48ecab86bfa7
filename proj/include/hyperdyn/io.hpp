#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyperdyn/analysis.hpp"
#include "hyperdyn/compact_set.hpp"
#include "hyperdyn/dynamics.hpp"
#include "hyperdyn/errors.hpp"

namespace hyperdyn {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return x;
}

// ---------------------------------------------------------------------------
// Spaces and sets

inline Json space_to_json(const Space& s) {
    Json j;
    j["kind"] = std::string(to_string(s.kind()));
    if (s.is_circle()) return j;
    j["lower"] = std::vector<double>(s.lower().begin(), s.lower().end());
    j["upper"] = std::vector<double>(s.upper().begin(), s.upper().end());
    Json ex = Json::array();
    for (const auto& e : s.excluded()) ex.push_back({{"center", e.center}, {"radius", e.radius}});
    j["excluded"] = ex;
    return j;
}

inline Space space_from_json(const Json& j) {
    const auto kind = space_kind_from_string(j.at("kind").get<std::string>());
    if (kind == SpaceKind::circle) return Space::circle();
    std::vector<Exclusion> ex;
    if (j.contains("excluded"))
        for (const auto& e : j.at("excluded"))
            ex.push_back({e.at("center").get<std::vector<double>>(), e.value("radius", 0.0)});
    return Space::box(kind, j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>(),
                      std::move(ex));
}

inline Json set_to_json(const CompactSet& a) {
    Json pts = Json::array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto p = a.point(i);
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    return Json{{"space", space_to_json(a.space())}, {"resolution", a.resolution()}, {"size", a.size()}, {"points", pts}};
}

inline CompactSet set_from_json(const Json& j, SpacePtr space = nullptr) {
    if (!space) space = make_space(space_from_json(j.at("space")));
    std::vector<double> flat;
    for (const auto& p : j.at("points"))
        for (const auto& x : p) flat.push_back(x.get<double>());
    return CompactSet::from_flat(space, std::move(flat), j.value("resolution", 0.0));
}

inline std::string set_csv_header(const Space& s) {
    if (s.is_circle()) return "theta";
    if (s.coord_count() == 1) return "x";
    if (s.coord_count() == 2) return "x,y";
    std::string h;
    for (std::size_t k = 0; k < s.coord_count(); ++k) h += (k ? ",x" : "x") + std::to_string(k);
    return h;
}

inline std::string set_to_csv(const CompactSet& a) {
    std::string out = set_csv_header(a.space()) + "\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto p = a.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) out += ',';
            out += format_double(p[k]);
        }
        out += '\n';
    }
    return out;
}

inline CompactSet set_from_csv(std::istream& in, const SpacePtr& space, double h = 0.0) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("set csv: missing header");
    std::vector<double> flat;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::size_t fields = 0, pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            try {
                flat.push_back(parse_double(std::string_view(line).substr(pos, comma - pos)));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("set csv line " + std::to_string(lineno) + ": " + e.what());
            }
            ++fields;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields != space->coord_count())
            throw std::invalid_argument("set csv line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(space->coord_count()) + " fields");
    }
    return CompactSet::from_flat(space, std::move(flat), h);
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const AttractorReport& r) {
    Json j;
    j["status"] = to_string(r.status);
    j["converged"] = r.converged;
    j["steps"] = r.steps;
    j["residual"] = r.residual;
    j["fixed_point_defect"] = r.fixed_point_defect;
    if (r.status == AttractorStatus::cycle_detected) j["cycle_period"] = r.cycle_period;
    j["residuals"] = r.residuals;
    j["attractor"] = set_to_json(r.attractor);
    return j;
}

inline Json to_json(const StabilityReport& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["generated_by_multimap"] = r.generated_by_multimap;
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json o;
        o["epsilon"] = row.epsilon;
        o["delta"] = row.delta ? Json(*row.delta) : Json(nullptr);
        o["horizon"] = row.horizon;
        o["samples"] = row.samples;
        o["worst_excursion"] = row.worst_excursion;
        rows.push_back(o);
    }
    j["rows"] = rows;
    if (r.witness) {
        const auto& w = *r.witness;
        j["witness"] = Json{{"epsilon", w.epsilon},
                            {"delta", w.delta},
                            {"exit_step", w.exit_step},
                            {"distances", w.distances},
                            {"start", set_to_json(w.start)}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

inline std::string to_csv(const StabilityReport& r) {
    std::string out = "epsilon,delta,horizon,samples\n";
    for (const auto& row : r.rows)
        out += format_double(row.epsilon) + "," + (row.delta ? format_double(*row.delta) : std::string()) + "," +
               std::to_string(row.horizon) + "," + std::to_string(row.samples) + "\n";
    return out;
}

inline std::string to_text(const StabilityReport& r) {
    std::vector<std::vector<std::string>> cells{{"epsilon", "delta", "horizon", "samples", "worst"}};
    for (const auto& row : r.rows)
        cells.push_back({format_double(row.epsilon), row.delta ? format_double(*row.delta) : "-",
                         std::to_string(row.horizon), std::to_string(row.samples),
                         format_double(row.worst_excursion)});
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    std::string out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) out += "  ";
            out += std::string(width[c] - line[c].size(), ' ') + line[c];
        }
        out += '\n';
    }
    out += std::string("verdict: ") + to_string(r.verdict) + "\n";
    return out;
}

inline Json to_json(const std::optional<Witness>& w, double target, std::size_t trials) {
    Json j{{"found", w.has_value()}, {"target", target}, {"trials", trials}};
    if (w) {
        j["metric"] = w->metric;
        j["x"] = w->x;
        j["x_prime"] = w->x_prime;
        j["ratio"] = w->ratio;
    }
    return j;
}

inline Json to_json(const JanosDiagnosis& d) {
    Json pairs = Json::array();
    for (const auto& p : d.pairs)
        pairs.push_back(Json{{"hausdorff0", p.hausdorff0},
                             {"value", p.value},
                             {"argmax", p.argmax},
                             {"value_doubled", p.value_doubled},
                             {"argmax_doubled", p.argmax_doubled},
                             {"weighted", p.weighted}});
    return Json{{"c", d.c}, {"horizon", d.horizon}, {"verdict", to_string(d.verdict)}, {"pairs", pairs}};
}

inline std::string to_csv(const Trajectory& t) {
    std::string out = "step,residual,ref_distance\n";
    for (std::size_t k = 0; k < t.sets.size(); ++k) {
        out += std::to_string(k) + ",";
        if (k < t.residuals.size()) out += format_double(t.residuals[k]);
        out += ",";
        if (k < t.ref_distances.size()) out += format_double(t.ref_distances[k]);
        out += "\n";
    }
    return out;
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Figures

struct RenderParams {
    int width = 512;
    int height = 512;
};

namespace detail {

struct Frame {
    bool line = false;  // one-dimensional: sets become horizontal bands
    double lo[2] = {0.0, 0.0};
    double hi[2] = {1.0, 1.0};
};

inline Frame frame_for(const std::vector<CompactSet>& sets) {
    if (sets.empty()) throw std::invalid_argument("render: no sets");
    const Space& s = sets.front().space();
    for (const auto& a : sets)
        if (!(a.space() == s)) throw std::invalid_argument("render: sets live in different spaces");
    if (s.dimension() > 2) throw Unsupported("render: only dimensions 1 and 2 can be drawn");
    Frame f;
    if (s.is_circle()) {
        f.lo[0] = f.lo[1] = -1.0;
        f.hi[0] = f.hi[1] = 1.0;
    } else if (s.coord_count() == 1) {
        f.line = true;
        f.lo[0] = s.lower()[0];
        f.hi[0] = s.upper()[0];
    } else {
        for (int k = 0; k < 2; ++k) {
            f.lo[k] = s.lower()[k];
            f.hi[k] = s.upper()[k];
        }
    }
    return f;
}

inline void plane_coords(const Space& s, PointView p, double& x, double& y) {
    if (s.is_circle()) {
        x = std::cos(p[0]);
        y = std::sin(p[0]);
    } else {
        x = p[0];
        y = p.size() > 1 ? p[1] : 0.0;
    }
}

inline int to_pixel(double v, double lo, double hi, int n) {
    const long k = std::lround((v - lo) / (hi - lo) * (n - 1));
    return static_cast<int>(std::clamp<long>(k, 0, n - 1));
}

}  // namespace detail

/// Binary P5 image, white background, black points. Sets on a line are
/// stacked as horizontal bands, one per set.
inline std::string render_pgm(const std::vector<CompactSet>& sets, const RenderParams& rp = {}) {
    const auto f = detail::frame_for(sets);
    if (rp.width < 1 || rp.height < 1) throw std::invalid_argument("render: bad image size");
    std::vector<unsigned char> px(static_cast<std::size_t>(rp.width) * rp.height, 255);
    const int bands = static_cast<int>(sets.size());
    for (int si = 0; si < bands; ++si) {
        const auto& a = sets[si];
        for (std::size_t i = 0; i < a.size(); ++i) {
            double x, y;
            detail::plane_coords(a.space(), a.point(i), x, y);
            const int col = detail::to_pixel(x, f.lo[0], f.hi[0], rp.width);
            if (f.line) {
                const int r0 = si * rp.height / bands, r1 = (si + 1) * rp.height / bands;
                for (int r = r0; r < r1; ++r) px[static_cast<std::size_t>(r) * rp.width + col] = 0;
            } else {
                const int row = rp.height - 1 - detail::to_pixel(y, f.lo[1], f.hi[1], rp.height);
                px[static_cast<std::size_t>(row) * rp.width + col] = 0;
            }
        }
    }
    std::string out = "P5\n" + std::to_string(rp.width) + " " + std::to_string(rp.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(px.data()), px.size());
    return out;
}

/// SVG with one group of dots per set, later sets drawn darker.
inline std::string render_svg(const std::vector<CompactSet>& sets, const RenderParams& rp = {}) {
    const auto f = detail::frame_for(sets);
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                  rp.width, rp.height, rp.width, rp.height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const std::size_t n = sets.size();
    for (std::size_t si = 0; si < n; ++si) {
        const int shade = n == 1 ? 0 : static_cast<int>(200 - 200 * si / (n - 1));
        std::snprintf(buf, sizeof buf, "<g id=\"step-%zu\" fill=\"rgb(%d,%d,%d)\">\n", si, shade, shade, shade);
        out += buf;
        const auto& a = sets[si];
        for (std::size_t i = 0; i < a.size(); ++i) {
            double x, y;
            detail::plane_coords(a.space(), a.point(i), x, y);
            const double cx = (x - f.lo[0]) / (f.hi[0] - f.lo[0]) * rp.width;
            const double cy = f.line ? (si + 0.5) * rp.height / n
                                     : rp.height - (y - f.lo[1]) / (f.hi[1] - f.lo[1]) * rp.height;
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1\"/>\n", cx, cy);
            out += buf;
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace hyperdyn
