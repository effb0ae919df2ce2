#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "emsrc/cauchy.hpp"
#include "emsrc/config.hpp"
#include "emsrc/reconstruct.hpp"

namespace emsrc {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Full double precision; %.17g round-trips exactly.
inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v == 0.0 ? 0.0 : v); // normalize -0
    return buf;
}

inline std::string fmt_moment3(const cplx& c) {
    const double re = c.real(), im = c.imag();
    if (im == 0.0)
        return fmt3(re);
    std::string s = fmt3(re);
    s += (im < 0 ? "-" : "+");
    s += fmt3(std::abs(im));
    s += "i";
    return s;
}

} // namespace detail

inline const char* cauchy_csv_header =
    "idx,phi,theta,x,y,z,nux,nuy,nuz,w,ReE1,ImE1,ReE2,ImE2,ReE3,ImE3,ReC1,ImC1,ReC2,ImC2,ReC3,ImC3";

// Writes <prefix>.json (metadata) and <prefix>.csv (bulk samples).
inline void write_cauchy_data(const CauchyData& data, const std::string& prefix) {
    const std::string csv_path = prefix + ".csv";
    const std::string meta_path = prefix + ".json";

    std::ofstream csv(csv_path);
    if (!csv)
        throw IoError("cannot write " + csv_path);
    csv << cauchy_csv_header << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vec3& p = data.surface.points[i];
        const Vec3& nu = data.surface.normals[i];
        const CVec3& e = data.E[i];
        const CVec3& c = data.curlE_cross_nu[i];
        csv << i << ',' << detail::fmt17(data.surface.phis[i]) << ','
            << detail::fmt17(data.surface.thetas[i]) << ',' << detail::fmt17(p.x) << ','
            << detail::fmt17(p.y) << ',' << detail::fmt17(p.z) << ',' << detail::fmt17(nu.x) << ','
            << detail::fmt17(nu.y) << ',' << detail::fmt17(nu.z) << ','
            << detail::fmt17(data.surface.weights[i]);
        for (int k = 0; k < 3; ++k)
            csv << ',' << detail::fmt17(e[k].real()) << ',' << detail::fmt17(e[k].imag());
        for (int k = 0; k < 3; ++k)
            csv << ',' << detail::fmt17(c[k].real()) << ',' << detail::fmt17(c[k].imag());
        csv << '\n';
    }
    csv.close();

    json meta;
    meta["format"] = "emsrc-cauchy-v1";
    meta["k"] = data.k;
    meta["surface"] = {{"center", detail::vec3_to_json(data.surface.center)},
                       {"radius", data.surface.radius},
                       {"n_phi", data.surface.n_phi},
                       {"n_theta", data.surface.n_theta}};
    meta["samples"] = data.size();
    meta["csv"] = std::filesystem::path(csv_path).filename().string();
    meta["provenance"] = {{"source_config_hash", data.provenance.source_config_hash},
                          {"delta1", data.provenance.delta1},
                          {"delta2", data.provenance.delta2},
                          {"seed", data.provenance.seed},
                          {"rng", data.provenance.rng}};
    std::ofstream metaf(meta_path);
    if (!metaf)
        throw IoError("cannot write " + meta_path);
    metaf << meta.dump(2) << "\n";
}

inline CauchyData read_cauchy_data(const std::string& meta_path) {
    std::ifstream metaf(meta_path);
    if (!metaf)
        throw IoError("cannot open " + meta_path);
    json meta;
    try {
        metaf >> meta;
    } catch (const json::parse_error& e) {
        throw IoError("data metadata " + meta_path + " is not valid JSON: " + e.what());
    }
    if (!meta.contains("format") || meta["format"] != "emsrc-cauchy-v1")
        throw IoError("data metadata " + meta_path + " has an unknown format tag");

    CauchyData data;
    data.k = meta["k"].get<double>();
    data.surface.center = detail::vec3_at(meta["surface"]["center"], "surface.center");
    data.surface.radius = meta["surface"]["radius"].get<double>();
    data.surface.n_phi = meta["surface"]["n_phi"].get<int>();
    data.surface.n_theta = meta["surface"]["n_theta"].get<int>();
    data.provenance.source_config_hash = meta["provenance"]["source_config_hash"].get<std::string>();
    data.provenance.delta1 = meta["provenance"]["delta1"].get<double>();
    data.provenance.delta2 = meta["provenance"]["delta2"].get<double>();
    data.provenance.seed = meta["provenance"]["seed"].get<std::uint64_t>();
    data.provenance.rng = meta["provenance"]["rng"].get<std::string>();

    const std::string csv_path =
        (std::filesystem::path(meta_path).parent_path() / meta["csv"].get<std::string>()).string();
    std::ifstream csv(csv_path);
    if (!csv)
        throw IoError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(csv, line) || line != cauchy_csv_header)
        throw IoError("unexpected CSV header in " + csv_path);

    const std::size_t n = meta["samples"].get<std::size_t>();
    data.surface.points.reserve(n);
    while (std::getline(csv, line)) {
        if (line.empty())
            continue;
        std::array<double, 22> f{};
        std::size_t pos = 0;
        for (int c = 0; c < 22; ++c) {
            const std::size_t next = line.find(',', pos);
            f[c] = std::strtod(line.c_str() + pos, nullptr);
            if (next == std::string::npos && c < 21)
                throw IoError("short CSV row in " + csv_path);
            pos = next + 1;
        }
        data.surface.phis.push_back(f[1]);
        data.surface.thetas.push_back(f[2]);
        data.surface.points.push_back({f[3], f[4], f[5]});
        data.surface.normals.push_back({f[6], f[7], f[8]});
        data.surface.weights.push_back(f[9]);
        data.E.push_back({cplx(f[10], f[11]), cplx(f[12], f[13]), cplx(f[14], f[15])});
        data.curlE_cross_nu.push_back({cplx(f[16], f[17]), cplx(f[18], f[19]), cplx(f[20], f[21])});
    }
    if (data.size() != n)
        throw IoError("sample count mismatch in " + csv_path);
    return data;
}

// 2D slice as CSV rows (coord1, coord2, value) on the grid sheet nearest to
// plane <axis>=<value>.
inline void export_field_slice(const ScalarField& field, int axis, double value,
                               const std::string& path, bool normalize = false) {
    const SamplingGrid& g = field.grid;
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("export_field_slice: axis must be 0, 1 or 2");
    if (value < g.box_min[axis] - 1e-12 || value > g.box_max[axis] + 1e-12)
        throw std::invalid_argument("export_field_slice: plane lies outside the sampling box");
    const int sheet = static_cast<int>(std::lround((value - g.box_min[axis]) / g.step(axis)));
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;

    const double mx = field.max_value();
    const double scale = normalize && mx > 0.0 ? 1.0 / mx : 1.0;

    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    const char* names = "xyz";
    out << names[a1] << ',' << names[a2] << ",value\n";
    int idx[3];
    idx[axis] = std::clamp(sheet, 0, g.n[axis] - 1);
    for (int i2 = 0; i2 < g.n[a2]; ++i2)
        for (int i1 = 0; i1 < g.n[a1]; ++i1) {
            idx[a1] = i1;
            idx[a2] = i2;
            const Vec3 p = g.point(idx[0], idx[1], idx[2]);
            out << detail::fmt17(p[a1]) << ',' << detail::fmt17(p[a2]) << ','
                << detail::fmt17(field.values[g.flat(idx[0], idx[1], idx[2])] * scale) << '\n';
        }
}

// Legacy-VTK structured points volume, loadable by standard viewers; the
// survey isovalue 0.2 refers to the normalized copy.
inline void export_field_vtk(const ScalarField& field, const std::string& path,
                             bool normalize = false) {
    const SamplingGrid& g = field.grid;
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    const double mx = field.max_value();
    const double scale = normalize && mx > 0.0 ? 1.0 / mx : 1.0;
    out << "# vtk DataFile Version 3.0\n";
    out << (field.label.empty() ? std::string("imaging function") : field.label) << "\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << "\n";
    out << "ORIGIN " << detail::fmt17(g.box_min.x) << ' ' << detail::fmt17(g.box_min.y) << ' '
        << detail::fmt17(g.box_min.z) << "\n";
    out << "SPACING " << detail::fmt17(g.step(0)) << ' ' << detail::fmt17(g.step(1)) << ' '
        << detail::fmt17(g.step(2)) << "\n";
    out << "POINT_DATA " << g.size() << "\n";
    out << "SCALARS imaging double 1\nLOOKUP_TABLE default\n";
    // VTK structured points iterate x fastest, matching the flat layout
    for (std::size_t f = 0; f < g.size(); ++f)
        out << detail::fmt17(field.values[f] * scale) << '\n';
}

// Self-contained result record: config echo, data provenance, recovered
// sources with diagnostics, error metrics against the configured truth,
// and run statistics.
struct ResultDocument {
    json doc;

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out)
            throw IoError("cannot write " + path);
        out << doc.dump(2) << "\n";
    }
};

namespace detail {

inline json part_result_to_json(const PartResult& r) {
    json rounds = json::array();
    for (const auto& rd : r.rounds) {
        json peaks = json::array();
        for (const auto& p : rd.peaks)
            peaks.push_back({{"location", vec3_to_json(p.location)}, {"value", p.value}});
        json accepted = json::array();
        for (const auto& a : rd.accepted)
            accepted.push_back({{"location", vec3_to_json(a.location)}, {"part", vec3_to_json(a.part)}});
        rounds.push_back({{"round", rd.round},
                          {"field_max", rd.field_max},
                          {"raw_field_max", rd.raw_field_max},
                          {"masked", rd.masked},
                          {"stopped", rd.stopped},
                          {"peaks", peaks},
                          {"accepted", accepted}});
    }
    return {{"variant", to_string(r.variant)},
            {"round1_max", r.round1_max},
            {"converged", r.converged},
            {"rounds", rounds}};
}

} // namespace detail

inline ResultDocument make_result_document(const ExperimentConfig& cfg, const CauchyData& data,
                                           const Reconstruction& rec, double wall_seconds) {
    ResultDocument out;
    json& doc = out.doc;
    doc["config"] = config_to_json(cfg);
    doc["data_provenance"] = {{"source_config_hash", data.provenance.source_config_hash},
                              {"delta1", data.provenance.delta1},
                              {"delta2", data.provenance.delta2},
                              {"seed", data.provenance.seed},
                              {"rng", data.provenance.rng}};

    json sources = json::array();
    for (const auto& s : rec.sources) {
        json j = {{"location", detail::vec3_to_json(s.location)},
                  {"moment", detail::cvec3_to_json(s.moment)},
                  {"matched", s.matched},
                  {"re_round", s.re_round},
                  {"im_round", s.im_round}};
        if (rec.mode == ReconstructionMode::SmallVolume) {
            j["direction"] = detail::cvec3_to_json(s.direction);
            j["magnitude"] = s.magnitude;
        }
        sources.push_back(j);
    }
    doc["reconstruction"] = {{"mode", rec.mode == ReconstructionMode::PointSources ? "point" : "small-volume"},
                             {"sources", sources},
                             {"rounds_re", detail::part_result_to_json(rec.re_result)},
                             {"rounds_im", detail::part_result_to_json(rec.im_result)},
                             {"base_evaluations", rec.base_evaluations}};

    // Error metrics when the config carries ground truth.
    const bool truth_points = !cfg.points.empty() && rec.mode == ReconstructionMode::PointSources;
    const bool truth_balls = !cfg.balls.empty() && rec.mode == ReconstructionMode::SmallVolume;
    if (truth_points || truth_balls) {
        json per_source = json::array();
        const std::size_t ntrue = truth_points ? cfg.points.size() : cfg.balls.size();
        for (std::size_t i = 0; i < ntrue; ++i) {
            const Vec3 tloc = truth_points ? cfg.points[i].location : cfg.balls[i].center;
            double best = -1.0;
            const ReconstructedSource* match = nullptr;
            for (const auto& s : rec.sources) {
                const double d = norm(s.location - tloc);
                if (best < 0.0 || d < best) {
                    best = d;
                    match = &s;
                }
            }
            json row = {{"true_location", detail::vec3_to_json(tloc)}};
            if (match) {
                row["computed_location"] = detail::vec3_to_json(match->location);
                row["location_error"] = best;
                if (truth_points) {
                    const CVec3 tm = cfg.points[i].moment;
                    row["true_moment"] = detail::cvec3_to_json(tm);
                    row["computed_moment"] = detail::cvec3_to_json(match->moment);
                    row["moment_relative_error"] = norm(match->moment - tm) / norm(tm);
                } else {
                    const CVec3 tv = cfg.balls[i].vector;
                    const CVec3 tdir = tv * (1.0 / norm(tv));
                    row["true_direction"] = detail::cvec3_to_json(tdir);
                    row["computed_direction"] = detail::cvec3_to_json(match->direction);
                    row["direction_relative_error"] = norm(match->direction - tdir);
                }
            }
            per_source.push_back(row);
        }
        doc["errors"] = {{"true_count", ntrue},
                         {"recovered_count", rec.sources.size()},
                         {"per_source", per_source}};
    }

    doc["stats"] = {{"wall_seconds", wall_seconds},
                    {"base_evaluations", rec.base_evaluations},
                    {"threads", thread_count()}};
    return out;
}

// Human-readable table mirroring the survey layout, 3-decimal rounding.
inline std::string format_result_table(const ExperimentConfig& cfg, const Reconstruction& rec) {
    std::ostringstream os;
    auto loc3 = [](const Vec3& v) {
        return "(" + detail::fmt3(v.x) + ", " + detail::fmt3(v.y) + ", " + detail::fmt3(v.z) + ")";
    };
    auto mom3 = [](const CVec3& m) {
        return "(" + detail::fmt_moment3(m.x) + ", " + detail::fmt_moment3(m.y) + ", " +
               detail::fmt_moment3(m.z) + ")";
    };

    const bool truth_points = !cfg.points.empty() && rec.mode == ReconstructionMode::PointSources;
    const bool truth_balls = !cfg.balls.empty() && rec.mode == ReconstructionMode::SmallVolume;
    if (truth_points || truth_balls) {
        os << "true location | computed location | true "
           << (truth_points ? "moment" : "direction") << " | computed "
           << (truth_points ? "moment" : "direction") << "\n";
        const std::size_t ntrue = truth_points ? cfg.points.size() : cfg.balls.size();
        for (std::size_t i = 0; i < ntrue; ++i) {
            const Vec3 tloc = truth_points ? cfg.points[i].location : cfg.balls[i].center;
            const ReconstructedSource* match = nullptr;
            double best = -1.0;
            for (const auto& s : rec.sources) {
                const double d = norm(s.location - tloc);
                if (best < 0.0 || d < best) {
                    best = d;
                    match = &s;
                }
            }
            os << loc3(tloc) << " | ";
            if (match) {
                os << loc3(match->location) << " | ";
                if (truth_points)
                    os << mom3(cfg.points[i].moment) << " | " << mom3(match->moment);
                else {
                    const CVec3 tv = cfg.balls[i].vector;
                    os << mom3(tv * (1.0 / norm(tv))) << " | " << mom3(match->direction);
                }
            } else {
                os << "(not recovered) | |";
            }
            os << "\n";
        }
    } else {
        os << "computed location | computed moment\n";
        for (const auto& s : rec.sources)
            os << loc3(s.location) << " | " << mom3(s.moment) << "\n";
    }
    return os.str();
}

} // namespace emsrc
