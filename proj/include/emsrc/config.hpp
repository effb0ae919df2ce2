#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsrc/grid.hpp"
#include "emsrc/imaging.hpp"
#include "emsrc/peaks.hpp"
#include "emsrc/reconstruct.hpp"
#include "emsrc/sources.hpp"
#include "emsrc/surface.hpp"
#include "emsrc/wave.hpp"

namespace emsrc {

using json = nlohmann::ordered_json;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Fully validated experiment description with the survey-protocol defaults
// applied (k=20, s=4, sphere rho=25 at 100x100, box [-1.5,1.5]^3 on the
// 0.015 lattice, 10% noise).
struct ExperimentConfig {
    WaveContext wave{20.0};
    Vec3 surface_center{0, 0, 0};
    double surface_radius = 25.0;
    int n_phi = 100;
    int n_theta = 100;

    SourceSet points;
    std::vector<BallSource> balls;
    int quad_order = 6;
    bool allow_exterior_sources = false;

    SamplingGrid grid{{-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}, {201, 201, 201}};
    BaseKind base = BaseKind::InteriorI;
    int s = 4;

    double delta1 = 0.1;
    double delta2 = 0.1;
    std::uint64_t seed = 7;

    ReconstructionParams params;
    ReconstructionMode mode = ReconstructionMode::PointSources;
    std::string output_dir = "out";

    std::vector<std::string> warnings;
    json echo; // normalized document this config reparses from

    MeasurementSurface make_surface() const {
        return build_sphere_surface(surface_center, surface_radius, n_phi, n_theta);
    }
};

namespace detail {

inline double num_at(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError("config field " + where + " must be a number");
    return j.get<double>();
}

inline Vec3 vec3_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("config field " + where + " must be a 3-element array");
    return {num_at(j[0], where), num_at(j[1], where), num_at(j[2], where)};
}

// Complex 3-vectors accept either plain numbers (real) or [re, im] pairs.
inline CVec3 cvec3_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("config field " + where + " must be a 3-element array");
    cplx c[3];
    for (int i = 0; i < 3; ++i) {
        const json& e = j[i];
        if (e.is_number())
            c[i] = cplx(e.get<double>(), 0.0);
        else if (e.is_array() && e.size() == 2)
            c[i] = cplx(num_at(e[0], where), num_at(e[1], where));
        else
            throw ConfigError("config field " + where + " components must be numbers or [re, im] pairs");
    }
    return {c[0], c[1], c[2]};
}

inline json cvec3_to_json(const CVec3& v) {
    json out = json::array();
    for (int i = 0; i < 3; ++i)
        out.push_back(json::array({v[i].real(), v[i].imag()}));
    return out;
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

} // namespace detail

// Parses and validates a config document; unknown keys are rejected so
// typos fail loudly rather than silently falling back to defaults.
inline ExperimentConfig parse_config_json(const json& doc) {
    if (!doc.is_object())
        throw ConfigError("config root must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "wave" && key != "surface" && key != "sources" && key != "grid" &&
            key != "imaging" && key != "noise" && key != "reconstruction" && key != "mode" &&
            key != "output" && key != "quad_order" && key != "allow_exterior_sources")
            throw ConfigError("unknown config field " + key);

    ExperimentConfig cfg;

    if (doc.contains("wave")) {
        const auto& w = doc["wave"];
        if (w.contains("k")) {
            const double k = detail::num_at(w["k"], "wave.k");
            if (!(k > 0.0))
                throw ConfigError("config field wave.k must be positive");
            cfg.wave = WaveContext(k);
        }
    }

    if (doc.contains("surface")) {
        const auto& s = doc["surface"];
        if (s.contains("center"))
            cfg.surface_center = detail::vec3_at(s["center"], "surface.center");
        if (s.contains("radius")) {
            cfg.surface_radius = detail::num_at(s["radius"], "surface.radius");
            if (!(cfg.surface_radius > 0.0))
                throw ConfigError("config field surface.radius must be positive");
        }
        if (s.contains("n_phi"))
            cfg.n_phi = static_cast<int>(detail::num_at(s["n_phi"], "surface.n_phi"));
        if (s.contains("n_theta"))
            cfg.n_theta = static_cast<int>(detail::num_at(s["n_theta"], "surface.n_theta"));
        if (cfg.n_phi < 2 || cfg.n_theta < 2)
            throw ConfigError("config fields surface.n_phi and surface.n_theta must be at least 2");
    }

    if (doc.contains("allow_exterior_sources"))
        cfg.allow_exterior_sources = doc["allow_exterior_sources"].get<bool>();
    if (doc.contains("quad_order")) {
        cfg.quad_order = static_cast<int>(detail::num_at(doc["quad_order"], "quad_order"));
        if (cfg.quad_order < 2)
            throw ConfigError("config field quad_order must be at least 2");
    }

    if (doc.contains("sources")) {
        const auto& s = doc["sources"];
        if (s.contains("points"))
            for (std::size_t i = 0; i < s["points"].size(); ++i) {
                const auto& p = s["points"][i];
                const std::string where = "sources.points[" + std::to_string(i) + "]";
                if (!p.contains("location") || !p.contains("moment"))
                    throw ConfigError(where + " needs location and moment");
                PointSource ps;
                ps.location = detail::vec3_at(p["location"], where + ".location");
                ps.moment = detail::cvec3_at(p["moment"], where + ".moment");
                if (norm(ps.moment) == 0.0)
                    throw ConfigError(where + ".moment must be nonzero");
                cfg.points.push_back(ps);
            }
        if (s.contains("balls"))
            for (std::size_t i = 0; i < s["balls"].size(); ++i) {
                const auto& b = s["balls"][i];
                const std::string where = "sources.balls[" + std::to_string(i) + "]";
                if (!b.contains("center") || !b.contains("radius") || !b.contains("vector"))
                    throw ConfigError(where + " needs center, radius and vector");
                BallSource bs;
                bs.center = detail::vec3_at(b["center"], where + ".center");
                bs.radius = detail::num_at(b["radius"], where + ".radius");
                bs.vector = detail::cvec3_at(b["vector"], where + ".vector");
                if (!(bs.radius > 0.0))
                    throw ConfigError(where + ".radius must be positive");
                if (norm(bs.vector) == 0.0)
                    throw ConfigError(where + ".vector must be nonzero");
                cfg.balls.push_back(bs);
            }
        if (!cfg.points.empty() && !cfg.balls.empty())
            throw ConfigError("config mixes point and ball sources; use one kind per experiment");
    }

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        Vec3 mn = cfg.grid.box_min, mx = cfg.grid.box_max;
        std::array<int, 3> n = cfg.grid.n;
        if (g.contains("box_min"))
            mn = detail::vec3_at(g["box_min"], "grid.box_min");
        if (g.contains("box_max"))
            mx = detail::vec3_at(g["box_max"], "grid.box_max");
        if (g.contains("n")) {
            if (g["n"].is_number())
                n = {g["n"].get<int>(), g["n"].get<int>(), g["n"].get<int>()};
            else {
                const Vec3 v = detail::vec3_at(g["n"], "grid.n");
                n = {static_cast<int>(v.x), static_cast<int>(v.y), static_cast<int>(v.z)};
            }
        }
        try {
            cfg.grid = SamplingGrid(mn, mx, n);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config field grid invalid: ") + e.what());
        }
        if (g.contains("two_stage"))
            cfg.params.two_stage = g["two_stage"].get<bool>();
        if (g.contains("coarse_n"))
            cfg.params.coarse_n = static_cast<int>(detail::num_at(g["coarse_n"], "grid.coarse_n"));
    }

    if (doc.contains("imaging")) {
        const auto& im = doc["imaging"];
        if (im.contains("base")) {
            const std::string b = im["base"].get<std::string>();
            if (b == "interior-I")
                cfg.base = BaseKind::InteriorI;
            else if (b == "conjugate-Ihat")
                cfg.base = BaseKind::ConjugateIhat;
            else
                throw ConfigError("config field imaging.base must be interior-I or conjugate-Ihat");
        }
        if (im.contains("s")) {
            cfg.s = static_cast<int>(detail::num_at(im["s"], "imaging.s"));
            if (cfg.s < 1)
                throw ConfigError("config field imaging.s must be a positive integer");
        }
    }

    if (doc.contains("noise")) {
        const auto& n = doc["noise"];
        if (n.contains("delta1"))
            cfg.delta1 = detail::num_at(n["delta1"], "noise.delta1");
        if (n.contains("delta2"))
            cfg.delta2 = detail::num_at(n["delta2"], "noise.delta2");
        if (n.contains("seed"))
            cfg.seed = n["seed"].get<std::uint64_t>();
        if (cfg.delta1 < 0.0 || cfg.delta2 < 0.0)
            throw ConfigError("config fields noise.delta1/delta2 must be nonnegative");
    }

    if (doc.contains("reconstruction")) {
        const auto& r = doc["reconstruction"];
        auto grab = [&](const char* name, double& slot) {
            if (r.contains(name))
                slot = detail::num_at(r[name], std::string("reconstruction.") + name);
        };
        grab("eta", cfg.params.eta);
        grab("gamma", cfg.params.gamma);
        grab("min_sep", cfg.params.min_sep);
        grab("tau_stop", cfg.params.tau_stop);
        grab("merge_radius", cfg.params.merge_radius);
        grab("mask_radius", cfg.params.mask_radius);
        grab("mask_ratio", cfg.params.mask_ratio);
        if (r.contains("max_rounds"))
            cfg.params.max_rounds = static_cast<int>(detail::num_at(r["max_rounds"], "reconstruction.max_rounds"));
        try {
            cfg.params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config field reconstruction invalid: ") + e.what());
        }
    }

    if (doc.contains("mode")) {
        const std::string m = doc["mode"].get<std::string>();
        if (m == "point")
            cfg.mode = ReconstructionMode::PointSources;
        else if (m == "small-volume")
            cfg.mode = ReconstructionMode::SmallVolume;
        else
            throw ConfigError("config field mode must be point or small-volume");
    }
    if (cfg.mode == ReconstructionMode::SmallVolume && !cfg.points.empty())
        throw ConfigError("small-volume mode expects ball sources");

    if (doc.contains("output") && doc["output"].contains("dir"))
        cfg.output_dir = doc["output"]["dir"].get<std::string>();

    // Physical consistency: sources must sit inside the measurement sphere
    // (unless explicitly admitted) and inside the sampling box.
    auto check_inside = [&](const Vec3& loc, const std::string& where) {
        const double d = norm(loc - cfg.surface_center);
        if (std::abs(d - cfg.surface_radius) <= 1e-9 * cfg.surface_radius)
            throw ConfigError(where + " lies on the measurement surface");
        if (d > cfg.surface_radius && !cfg.allow_exterior_sources)
            throw ConfigError(where + " lies outside the measurement sphere (set allow_exterior_sources to admit it)");
        if (!cfg.grid.contains(loc))
            cfg.warnings.push_back(where + " lies outside the sampling box; it cannot be imaged");
    };
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
        check_inside(cfg.points[i].location, "sources.points[" + std::to_string(i) + "].location");
    for (std::size_t i = 0; i < cfg.balls.size(); ++i)
        check_inside(cfg.balls[i].center, "sources.balls[" + std::to_string(i) + "].center");

    auto w1 = validate_sources(cfg.points, cfg.wave);
    cfg.warnings.insert(cfg.warnings.end(), w1.begin(), w1.end());
    if (!cfg.balls.empty()) {
        auto w2 = validate_balls(cfg.balls, cfg.wave);
        cfg.warnings.insert(cfg.warnings.end(), w2.begin(), w2.end());
    }

    cfg.echo = doc;
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return parse_config_json(doc);
}

// Canonical normalized form; reparsing it yields an equal configuration.
inline json config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["wave"] = {{"k", cfg.wave.k}};
    doc["surface"] = {{"center", detail::vec3_to_json(cfg.surface_center)},
                      {"radius", cfg.surface_radius},
                      {"n_phi", cfg.n_phi},
                      {"n_theta", cfg.n_theta}};
    json points = json::array();
    for (const auto& p : cfg.points)
        points.push_back({{"location", detail::vec3_to_json(p.location)},
                          {"moment", detail::cvec3_to_json(p.moment)}});
    json balls = json::array();
    for (const auto& b : cfg.balls)
        balls.push_back({{"center", detail::vec3_to_json(b.center)},
                         {"radius", b.radius},
                         {"vector", detail::cvec3_to_json(b.vector)}});
    doc["sources"] = {{"points", points}, {"balls", balls}};
    doc["grid"] = {{"box_min", detail::vec3_to_json(cfg.grid.box_min)},
                   {"box_max", detail::vec3_to_json(cfg.grid.box_max)},
                   {"n", json::array({cfg.grid.n[0], cfg.grid.n[1], cfg.grid.n[2]})},
                   {"two_stage", cfg.params.two_stage},
                   {"coarse_n", cfg.params.coarse_n}};
    doc["imaging"] = {{"base", cfg.base == BaseKind::InteriorI ? "interior-I" : "conjugate-Ihat"},
                      {"s", cfg.s}};
    doc["noise"] = {{"delta1", cfg.delta1}, {"delta2", cfg.delta2}, {"seed", cfg.seed}};
    doc["reconstruction"] = {{"eta", cfg.params.eta},
                             {"gamma", cfg.params.gamma},
                             {"min_sep", cfg.params.min_sep},
                             {"tau_stop", cfg.params.tau_stop},
                             {"max_rounds", cfg.params.max_rounds},
                             {"merge_radius", cfg.params.merge_radius},
                             {"mask_radius", cfg.params.mask_radius},
                             {"mask_ratio", cfg.params.mask_ratio}};
    doc["mode"] = cfg.mode == ReconstructionMode::PointSources ? "point" : "small-volume";
    doc["quad_order"] = cfg.quad_order;
    doc["allow_exterior_sources"] = cfg.allow_exterior_sources;
    doc["output"] = {{"dir", cfg.output_dir}};
    return doc;
}

// FNV-1a over the canonical dump; stamped into data provenance.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace emsrc
