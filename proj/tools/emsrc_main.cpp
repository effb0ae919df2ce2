#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "emsrc/emsrc.hpp"
#include "emsrc/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace emsrc;

namespace {

CauchyData simulate_from_config(const ExperimentConfig& cfg) {
    const auto surface = cfg.make_surface();
    CauchyData data;
    if (!cfg.points.empty())
        data = synthesize_point_source_data(cfg.points, surface, cfg.wave, cfg.allow_exterior_sources);
    else if (!cfg.balls.empty())
        data = synthesize_small_volume_data(cfg.balls, surface, cfg.wave, cfg.quad_order,
                                            cfg.allow_exterior_sources);
    else
        data = synthesize_point_source_data({}, surface, cfg.wave);
    data.provenance.source_config_hash = config_hash(cfg);
    return add_noise(data, cfg.delta1, cfg.delta2, cfg.seed);
}

void require_data_matches_config(const CauchyData& data, const ExperimentConfig& cfg) {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(data.k, cfg.wave.k))
        throw ConfigError("data wavenumber does not match the config");
    if (!close(data.surface.radius, cfg.surface_radius) ||
        norm(data.surface.center - cfg.surface_center) > 1e-12 ||
        data.surface.n_phi != cfg.n_phi || data.surface.n_theta != cfg.n_theta)
        throw ConfigError("data measurement surface does not match the config");
}

void print_warnings(const ExperimentConfig& cfg) {
    for (const auto& w : cfg.warnings)
        std::cerr << "warning: " << w << "\n";
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed_override) {
    auto cfg = parse_config(config_path);
    if (seed_override)
        cfg.seed = *seed_override;
    print_warnings(cfg);
    const auto data = simulate_from_config(cfg);
    fs::create_directories(cfg.output_dir);
    const std::string prefix = (fs::path(cfg.output_dir) / "data").string();
    write_cauchy_data(data, prefix);
    std::cout << "wrote " << prefix << ".json and " << prefix << ".csv (" << data.size()
              << " samples)\n";
    std::cout << "config hash " << data.provenance.source_config_hash << "\n";
    return 0;
}

int cmd_reconstruct(const std::string& config_path, const std::string& data_path, bool dense) {
    auto cfg = parse_config(config_path);
    print_warnings(cfg);
    if (dense)
        cfg.params.two_stage = false;
    const auto data = read_cauchy_data(data_path);
    require_data_matches_config(data, cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const auto rec = reconstruct_sources(data, cfg.grid, cfg.base, cfg.s, cfg.params, cfg.mode);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(cfg.output_dir);
    const auto doc = make_result_document(cfg, data, rec, wall);
    const std::string json_path = (fs::path(cfg.output_dir) / "result.json").string();
    doc.write(json_path);
    const std::string table = format_result_table(cfg, rec);
    const std::string table_path = (fs::path(cfg.output_dir) / "result.txt").string();
    std::ofstream tf(table_path);
    tf << table;
    tf.close();

    std::cout << table;
    std::cout << "recovered " << rec.sources.size() << " source(s) in " << wall << " s; wrote "
              << json_path << " and " << table_path << "\n";
    return 0;
}

int cmd_field(const std::string& config_path, const std::string& data_path,
              const std::string& plane, bool volume, bool normalize, std::string out_path,
              const std::string& variant_name) {
    auto cfg = parse_config(config_path);
    print_warnings(cfg);
    const auto data = read_cauchy_data(data_path);
    require_data_matches_config(data, cfg);

    Variant variant = Variant::Modulus;
    if (variant_name == "re")
        variant = Variant::RealPart;
    else if (variant_name == "im")
        variant = Variant::ImagPart;
    else if (variant_name != "abs")
        throw ConfigError("--variant must be abs, re or im");
    const ImagingSpec spec{cfg.base, variant, cfg.s};

    fs::create_directories(cfg.output_dir);
    if (volume) {
        const auto field = imaging_field(cfg.grid, spec, data);
        if (out_path.empty())
            out_path = (fs::path(cfg.output_dir) / "field.vtk").string();
        export_field_vtk(field, out_path, normalize);
        std::cout << "wrote " << out_path << " (" << field.grid.n[0] << "x" << field.grid.n[1]
                  << "x" << field.grid.n[2] << ")\n";
        return 0;
    }

    if (plane.size() < 3 || plane[1] != '=' ||
        (plane[0] != 'x' && plane[0] != 'y' && plane[0] != 'z'))
        throw ConfigError("--plane expects the form x=<v>, y=<v> or z=<v>");
    const int axis = plane[0] - 'x';
    const double value = std::stod(plane.substr(2));
    if (value < cfg.grid.box_min[axis] || value > cfg.grid.box_max[axis])
        throw ConfigError("--plane lies outside the sampling box");

    // Evaluate a three-sheet slab so the requested plane is an interior
    // sheet; only that sheet is exported.
    const double h = cfg.grid.step(axis);
    Vec3 mn = cfg.grid.box_min, mx = cfg.grid.box_max;
    std::array<int, 3> n = cfg.grid.n;
    const double lo = value - h, hi = value + h;
    if (axis == 0) { mn.x = lo; mx.x = hi; }
    if (axis == 1) { mn.y = lo; mx.y = hi; }
    if (axis == 2) { mn.z = lo; mx.z = hi; }
    n[axis] = 3;
    const SamplingGrid slab(mn, mx, n);
    const auto field = imaging_field(slab, spec, data);

    if (out_path.empty())
        out_path = (fs::path(cfg.output_dir) / ("field_" + std::string(1, plane[0]) + ".csv")).string();
    export_field_slice(field, axis, value, out_path, normalize);
    std::cout << "wrote " << out_path << " (" << field.grid.n[(axis + 1) % 3] << "x"
              << field.grid.n[(axis + 2) % 3] << " samples on " << plane << ")\n";
    return 0;
}

int cmd_selfcheck() {
    const auto checks = run_selfcheck();
    bool all_pass = true;
    std::printf("%-34s %14s %12s  %s\n", "check", "residual", "tolerance", "status");
    for (const auto& c : checks) {
        std::printf("%-34s %14.3e %12.1e  %s\n", c.name.c_str(), c.residual, c.tolerance,
                    c.pass ? "pass" : "FAIL");
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reconstruction of electromagnetic sources from single-frequency Cauchy data"};
    app.require_subcommand(1);

    int threads = 0;
    bool dense = false;
    std::optional<std::uint64_t> seed_override;
    app.add_option("--threads", threads, "worker thread count (default: hardware)");
    app.add_flag("--dense", dense, "full-grid evaluation instead of the two-stage scheme");
    app.add_option("--seed", seed_override, "override the config noise seed");

    std::string config_path, data_path, plane = "z=0", out_path, variant = "abs";
    bool volume = false, normalize = false;

    auto* sim = app.add_subcommand("simulate", "synthesize Cauchy data for the configured sources");
    sim->add_option("config", config_path, "experiment config JSON")->required();

    auto* rec = app.add_subcommand("reconstruct", "recover sources from a dataset");
    rec->add_option("config", config_path, "experiment config JSON")->required();
    rec->add_option("data", data_path, "dataset metadata JSON written by simulate")->required();

    auto* fld = app.add_subcommand("field", "evaluate and export an imaging function");
    fld->add_option("config", config_path)->required();
    fld->add_option("data", data_path)->required();
    auto* plane_opt = fld->add_option("--plane", plane, "plane spec like z=0.5");
    fld->add_flag("--volume", volume, "export the full grid as legacy VTK");
    fld->add_flag("--normalize", normalize, "scale exported values to max 1");
    fld->add_option("--out", out_path, "output file path");
    fld->add_option("--variant", variant, "abs, re or im (default abs)");

    app.add_subcommand("selfcheck", "run the kernel identity suite");

    CLI11_PARSE(app, argc, argv);

    if (threads > 0)
        set_thread_count(threads);

    try {
        if (app.got_subcommand("selfcheck"))
            return cmd_selfcheck();
        if (app.got_subcommand("simulate"))
            return cmd_simulate(config_path, seed_override);
        if (app.got_subcommand("reconstruct"))
            return cmd_reconstruct(config_path, data_path, dense);
        if (app.got_subcommand("field")) {
            if (volume && plane_opt->count() > 0)
                throw ConfigError("choose either --plane or --volume");
            return cmd_field(config_path, data_path, plane, volume, normalize, out_path, variant);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
