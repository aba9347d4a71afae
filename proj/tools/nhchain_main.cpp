// Command-line front end: every pipeline as a subcommand, configuration from a
// sectioned key = value file with flag overrides.
#include <CLI11.hpp>
#include <iostream>

#include "nhchain/cli.hpp"

using namespace nhchain;

int main(int argc, char** argv) {
    CLI::App app{"Complex band structure, non-Hermitian band topology and edge modes of "
                 "dimer chains of circular subwavelength resonators"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path, out_dir;
    int grid = -1, nmult = -1, threads = -1, cells = -1;
    app.add_option("--config", config_path, "configuration file");
    app.add_option("--out", out_dir, "output directory (default from config)");
    app.add_option("--grid", grid, "alpha grid size override");
    app.add_option("--nmult", nmult, "multipole order override");
    app.add_option("--threads", threads, "worker thread count override (0 = hardware)");
    app.add_option("--cells", cells, "cells per side / pairs per side override");

    int samples = 20;
    long oracle_terms = 100000;
    bool emit_mu = false;
    int figure = 0;

    auto* c_green = app.add_subcommand("greencheck",
                                       "accelerated vs. reference Green's function values");
    c_green->add_option("--samples", samples, "number of evaluation points");
    c_green->add_option("--oracle-terms", oracle_terms, "partial-sum terms in the reference");
    auto* c_cap = app.add_subcommand("capmatrix", "quasiperiodic capacitance sweep as CSV");
    auto* c_bands = app.add_subcommand("bands", "complex band functions over the zone");
    auto* c_trace = app.add_subcommand("trace", "band curves for the complex-plane plot");
    auto* c_vort = app.add_subcommand("vorticity", "winding of the band gap");
    auto* c_zak = app.add_subcommand("zak", "biorthogonal Zak phases");
    auto* c_phase = app.add_subcommand("phasefactor", "eigenmode phase-factor traces");
    auto* c_defect = app.add_subcommand("defect", "decay roots, flat band and defect frequency");
    c_defect->add_flag("--emit-mu", emit_mu, "write the mu branch samples as CSV");
    auto* c_finite = app.add_subcommand("finite", "finite material-defect array eigenmodes");
    auto* c_geom = app.add_subcommand("geomdefect", "finite geometric-defect array eigenmodes");
    auto* c_repro = app.add_subcommand("reproduce", "preset figure datasets");
    c_repro->add_option("--figure", figure, "figure id: 2, 3, 5, 6, 8, 9, 10, 11")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cli::RunContext ctx;
        if (!config_path.empty()) ctx.cfg = parse_config_file(config_path);
        if (grid > 0) ctx.cfg.grid = grid;
        if (nmult > 0) ctx.cfg.nmult = nmult;
        if (threads >= 0) ctx.cfg.threads = threads;
        if (cells > 0) ctx.cfg.cells = cells;
        if (!out_dir.empty()) ctx.cfg.out = out_dir;
        ctx.out_dir = ctx.cfg.out;

        for (const auto& w : ctx.cfg.material().warnings())
            std::cerr << "warning: " << w << "\n";

        if (c_green->parsed()) return cli::run_greencheck(ctx, std::cout, samples, oracle_terms);
        if (c_cap->parsed()) return cli::run_capmatrix(ctx);
        if (c_bands->parsed()) return cli::run_bands(ctx);
        if (c_trace->parsed()) return cli::run_trace(ctx);
        if (c_vort->parsed()) return cli::run_vorticity(ctx, std::cout);
        if (c_zak->parsed()) return cli::run_zak(ctx, std::cout);
        if (c_phase->parsed()) return cli::run_phasefactor(ctx);
        if (c_defect->parsed()) return cli::run_defect(ctx, std::cout, emit_mu);
        if (c_finite->parsed()) return cli::run_finite(ctx, std::cout);
        if (c_geom->parsed()) return cli::run_geomdefect(ctx, std::cout);
        if (c_repro->parsed()) return cli::run_reproduce(ctx, std::cout, figure);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_geometry& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const no_flat_band& e) {
        std::cerr << "not found: " << e.what() << "\n";
        return 4;
    } catch (const not_found& e) {
        std::cerr << "not found: " << e.what() << "\n";
        return 4;
    } catch (const error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
