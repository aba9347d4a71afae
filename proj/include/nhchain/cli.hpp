#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhchain/config.hpp"
#include "nhchain/topology.hpp"
#include "nhchain/version.hpp"

namespace nhchain::cli {

using nlohmann::json;

// Fixed-format float printing keeps every emitted file byte-identical across
// runs and thread counts.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(os) {
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) os_ << (i ? "," : "") << fmt(vals[i]);
        os_ << "\n";
    }

private:
    std::ostream& os_;
};

struct RunContext {
    ExperimentConfig cfg;
    std::filesystem::path out_dir;
    std::map<std::string, double> timings_ms;
    std::vector<std::string> files;

    std::ofstream open(const std::string& name) {
        std::filesystem::create_directories(out_dir);
        files.push_back(name);
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw error("cannot open output file " + (out_dir / name).string());
        return f;
    }

    template <typename Fn>
    auto timed(const std::string& label, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto result = fn();
        const auto t1 = std::chrono::steady_clock::now();
        timings_ms[label] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return result;
    }

    void write_json(const std::string& name, const json& j) {
        auto f = open(name);
        f << j.dump(2) << "\n";
    }

    void write_manifest(const std::string& command) {
        json j;
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(cfg.hash()));
        j["command"] = command;
        j["config_hash"] = hash;
        j["version"] = version_string;
        j["files"] = files;
        j["timings_ms"] = timings_ms;
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir / "manifest.json", std::ios::binary);
        f << j.dump(2) << "\n";
    }
};

inline json complex_json(complexd z) { return json::array({z.real(), z.imag()}); }

// ---- subcommands -----------------------------------------------------------

// Accelerated evaluation against the slow spectral partial sum at pseudo-random
// points (kept off the axis, where the reference itself converges).
inline int run_greencheck(RunContext& ctx, std::ostream& os, int samples = 20,
                          long oracle_terms = 100000) {
    const auto geom = ctx.cfg.geometry();
    const double L = geom.period();
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> ux(-L / 2, L / 2), us(0.05, 3.0),
        ua(0.05, 0.95);
    CsvWriter csv(os, {"x1", "x2", "y1", "y2", "alpha", "re_accel", "im_accel", "re_oracle",
                       "im_oracle", "residual"});
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double alpha = ua(rng) * M_PI / L;
        const Vec2 x{ux(rng), us(rng)};
        const Vec2 y{ux(rng), -us(rng)};
        const QuasiPeriodicity qp{alpha, L};
        GreenEvalParams gp;
        gp.target_tol = ctx.cfg.green_tol;
        const complexd acc = qp_green_quasistatic(x, y, qp, gp);
        const complexd ref = qp_green_spectral_reference(x, y, qp, oracle_terms);
        const double res = std::abs(acc - ref) / std::abs(ref);
        worst = std::max(worst, res);
        csv.row({x.x, x.y, y.x, y.y, alpha, acc.real(), acc.imag(), ref.real(), ref.imag(), res});
    }
    json j;
    j["samples"] = samples;
    j["oracle_terms"] = oracle_terms;
    j["max_residual"] = worst;
    ctx.write_json("greencheck_summary.json", j);
    ctx.write_manifest("greencheck");
    return worst <= 1e-8 ? 0 : 3;
}

inline int run_capmatrix(RunContext& ctx) {
    const auto geom = ctx.cfg.geometry();
    auto caps = ctx.timed("sweep", [&] {
        return capacitance_sweep(geom, alpha_grid(geom.period(), ctx.cfg.grid),
                                 ctx.cfg.cap_options());
    });
    auto f = ctx.open("capmatrix.csv");
    CsvWriter csv(f, {"alpha", "re_c11", "re_c12", "im_c12", "residual"});
    for (const auto& c : caps)
        csv.row({c.alpha, c.c11(), c.c12().real(), c.c12().imag(), c.residual});
    ctx.write_manifest("capmatrix");
    return 0;
}

inline BandSpectrum compute_bands(RunContext& ctx) {
    return ctx.timed("bands", [&] {
        return band_structure(ctx.cfg.geometry(), ctx.cfg.material(), ctx.cfg.band_options());
    });
}

inline void write_band_csv(RunContext& ctx, const std::string& name, const BandSpectrum& spec) {
    auto f = ctx.open(name);
    CsvWriter csv(f, {"alpha", "re_omega1", "im_omega1", "re_omega2", "im_omega2"});
    for (std::size_t i = 0; i < spec.alphas.size(); ++i)
        csv.row({spec.alphas[i], spec.omegas[i][0].real(), spec.omegas[i][0].imag(),
                 spec.omegas[i][1].real(), spec.omegas[i][1].imag()});
}

inline int run_bands(RunContext& ctx) {
    auto spec = compute_bands(ctx);
    write_band_csv(ctx, "bands.csv", spec);
    ctx.write_manifest("bands");
    return 0;
}

inline int run_trace(RunContext& ctx) {
    auto spec = compute_bands(ctx);
    write_band_csv(ctx, "trace.csv", spec);
    ctx.write_manifest("trace");
    return 0;
}

inline int run_vorticity(RunContext& ctx, std::ostream& os) {
    auto spec = compute_bands(ctx);
    const double nu = vorticity(spec);
    const long nu_int = std::lround(nu);
    os << nu_int << "\n";
    json j;
    j["vorticity"] = nu_int;
    j["raw"] = nu;
    j["min_gap"] = spec.min_gap;
    ctx.write_json("vorticity_summary.json", j);
    ctx.write_manifest("vorticity");
    return 0;
}

inline int run_zak(RunContext& ctx, std::ostream& os) {
    auto spec = compute_bands(ctx);
    auto z = zak_phases(spec, ctx.cfg.material());
    os << "phi1 " << fmt(z.phi1) << "\nphi2 " << fmt(z.phi2) << "\nphi_total "
       << fmt(z.total()) << "\n";
    json j;
    j["phi1"] = z.phi1;
    j["phi2"] = z.phi2;
    j["phi_total"] = z.total();
    j["grid"] = z.grid;
    ctx.write_json("zak_summary.json", j);
    ctx.write_manifest("zak");
    return 0;
}

inline int run_phasefactor(RunContext& ctx) {
    auto spec = compute_bands(ctx);
    const auto mat = ctx.cfg.material();
    auto t1 = phase_factor_trace(spec, mat, 0);
    auto t2 = phase_factor_trace(spec, mat, 1);
    auto f = ctx.open("phasefactor.csv");
    CsvWriter csv(f, {"alpha", "re_phase1", "im_phase1", "re_phase2", "im_phase2"});
    for (std::size_t i = 0; i < spec.alphas.size(); ++i)
        csv.row({spec.alphas[i], t1[i].real(), t1[i].imag(), t2[i].real(), t2[i].imag()});
    ctx.write_manifest("phasefactor");
    return 0;
}

inline int run_defect(RunContext& ctx, std::ostream& os, bool emit_mu) {
    const auto geom = ctx.cfg.geometry();
    const auto mat = ctx.cfg.material();
    DefectPrediction pred;
    bool has_mode = true;
    std::string reason;
    try {
        pred = ctx.timed("predict", [&] {
            return predict_defect(geom, mat, ctx.cfg.defect_options());
        });
    } catch (const no_flat_band& e) {
        has_mode = false;
        reason = e.what();
        pred.edge = edge_parameters(geom, ctx.cfg.cap_options());
        auto [bp, bm] = decay_roots(mat.kappa1, mat.kappa2, pred.edge.l);
        pred.b_plus = bp;
        pred.b_minus = bm;
        pred.pt_class = classify_pt(mat.kappa1, mat.kappa2, pred.edge.l);
    }

    os << "pt_class " << to_string(pred.pt_class) << "\n";
    os << "b_plus " << fmt(pred.b_plus.real()) << " " << fmt(pred.b_plus.imag()) << "\n";
    os << "b_minus " << fmt(pred.b_minus.real()) << " " << fmt(pred.b_minus.imag()) << "\n";
    json j;
    j["pt_class"] = to_string(pred.pt_class);
    j["lambda1"] = pred.edge.lambda1;
    j["lambda2"] = pred.edge.lambda2;
    j["l"] = pred.edge.l;
    j["b_plus"] = complex_json(pred.b_plus);
    j["b_minus"] = complex_json(pred.b_minus);
    j["found"] = has_mode;
    if (has_mode) {
        os << "b0 " << fmt(pred.b0.real()) << " " << fmt(pred.b0.imag()) << " (|b0| "
           << fmt(std::abs(pred.b0)) << ")\n";
        os << "mu " << fmt(pred.flat.mu.real()) << " " << fmt(pred.flat.mu.imag()) << "\n";
        os << "flatness " << fmt(pred.flat.flatness) << "\n";
        os << "omega " << fmt(pred.omega.real()) << " " << fmt(pred.omega.imag()) << "\n";
        j["b0"] = complex_json(pred.b0);
        j["abs_b0"] = std::abs(pred.b0);
        j["mu"] = complex_json(pred.flat.mu);
        j["flatness"] = pred.flat.flatness;
        j["other_flatness"] = pred.flat.other_flatness;
        j["gamma_winding"] = pred.flat.curves.winding;
        j["omega"] = complex_json(pred.omega);
        if (emit_mu) {
            auto f = ctx.open("mu.csv");
            CsvWriter csv(f, {"alpha", "re_mu1", "im_mu1", "re_mu2", "im_mu2"});
            for (std::size_t i = 0; i < pred.flat.curves.alphas.size(); ++i)
                csv.row({pred.flat.curves.alphas[i], pred.flat.mu_samples[i][0].real(),
                         pred.flat.mu_samples[i][0].imag(), pred.flat.mu_samples[i][1].real(),
                         pred.flat.mu_samples[i][1].imag()});
        }
    } else {
        os << "no localized-mode candidate: " << reason << "\n";
        j["reason"] = reason;
    }
    ctx.write_json("defect_summary.json", j);
    ctx.write_manifest("defect");
    return has_mode ? 0 : 4;
}

inline void write_mode_csv(RunContext& ctx, const std::string& name,
                           const FiniteArrayLayout& layout, const FiniteModeSet& modes,
                           int index) {
    auto f = ctx.open(name);
    CsvWriter csv(f, {"index", "x_center", "re_u", "im_u", "abs_u"});
    const Eigen::VectorXcd u = modes.modes.col(index);
    double scale = 0.0;
    for (int i = 0; i < u.size(); ++i) scale = std::max(scale, std::abs(u(i)));
    for (int i = 0; i < u.size(); ++i)
        csv.row({static_cast<double>(i), layout.centers[static_cast<std::size_t>(i)].x,
                 u(i).real() / scale, u(i).imag() / scale, std::abs(u(i)) / scale});
}

inline int run_finite(RunContext& ctx, std::ostream& os) {
    const auto geom = ctx.cfg.geometry();
    const auto mat = ctx.cfg.material();
    auto run = ctx.timed("pipeline", [&] {
        return material_defect_pipeline(geom, mat, ctx.cfg.cells, ctx.cfg.finite_options(),
                                        ctx.cfg.defect_options());
    });
    json j;
    j["resonators"] = run.modes.size();
    j["prediction_found"] = run.prediction.has_value();
    j["localized_found"] = run.localized.has_value();
    if (run.prediction) {
        j["omega_predicted"] = complex_json(run.prediction->omega);
        j["abs_b0"] = std::abs(run.prediction->b0);
    }
    if (run.localized) {
        const int idx = run.localized->index;
        j["mode_index"] = idx;
        j["omega"] = complex_json(run.modes.omega[static_cast<std::size_t>(idx)]);
        j["localization_score"] = run.localized->score;
        if (run.fit) {
            j["b_fit"] = run.fit->b_magnitude;
            j["cell_decay"] = run.fit->cell_decay;
            if (run.fit->e_omega) j["e_omega"] = *run.fit->e_omega;
        }
        write_mode_csv(ctx, "mode.csv", run.layout, run.modes, idx);
        os << "localized mode " << idx << " omega "
           << fmt(run.modes.omega[static_cast<std::size_t>(idx)].real()) << " "
           << fmt(run.modes.omega[static_cast<std::size_t>(idx)].imag()) << "\n";
    } else {
        os << "no localized mode\n";
    }
    ctx.write_json("finite_summary.json", j);
    ctx.write_manifest("finite");
    return run.localized ? 0 : 4;
}

inline int run_geomdefect(RunContext& ctx, std::ostream& os) {
    const auto geom = ctx.cfg.geometry();
    const auto mat = ctx.cfg.material();
    auto run = ctx.timed("pipeline", [&] {
        return geometric_defect_pipeline(geom, mat, ctx.cfg.cells, ctx.cfg.finite_options());
    });
    json j;
    j["resonators"] = run.modes.size();
    j["localized_found"] = run.localized.has_value();
    for (const auto& w : run.layout.warnings) j["warnings"].push_back(w);
    if (run.localized) {
        const int idx = run.localized->index;
        j["mode_index"] = idx;
        j["omega"] = complex_json(run.modes.omega[static_cast<std::size_t>(idx)]);
        j["localization_score"] = run.localized->score;
        j["center_weight"] = run.center_weight;
        j["pair_decay"] = run.pair_decay;
        write_mode_csv(ctx, "mode.csv", run.layout, run.modes, idx);
        os << "localized mode " << idx << " omega "
           << fmt(run.modes.omega[static_cast<std::size_t>(idx)].real()) << " "
           << fmt(run.modes.omega[static_cast<std::size_t>(idx)].imag()) << "\n";
    } else {
        os << "no localized mode\n";
    }
    ctx.write_json("geomdefect_summary.json", j);
    ctx.write_manifest("geomdefect");
    return run.localized ? 0 : 4;
}

// Preset parameter bundles reproducing the published figures.
inline int run_reproduce(RunContext& ctx, std::ostream& os, int figure) {
    auto with_kappa = [&](complexd k1, complexd k2) {
        RunContext sub = ctx;
        sub.cfg.kappa1 = k1;
        sub.cfg.kappa2 = k2;
        sub.files.clear();
        return sub;
    };
    auto merge = [&](RunContext& sub) {
        for (auto& f : sub.files) ctx.files.push_back(f);
        for (auto& [k, v] : sub.timings_ms) ctx.timings_ms[k] += v;
    };
    std::ostringstream devnull;

    switch (figure) {
        case 2:
        case 3: {
            const complexd k1 = figure == 2 ? complexd(1.0, 1.4) : complexd(1.0, 1.2);
            const complexd k2 = figure == 2 ? complexd(1.0, -1.4) : complexd(1.0, -1.6);
            auto sub = with_kappa(k1, k2);
            sub.out_dir = ctx.out_dir;
            auto spec = compute_bands(sub);
            write_band_csv(sub, "bands.csv", spec);
            write_band_csv(sub, "trace.csv", spec);
            // the two defect structures of the same moduli
            json defects = json::array();
            for (auto [a, b] : {std::pair{k1, k2}, std::pair{k2, k1}}) {
                auto dsub = with_kappa(a, b);
                try {
                    auto pred = predict_defect(dsub.cfg.geometry(), dsub.cfg.material(),
                                               dsub.cfg.defect_options());
                    defects.push_back({{"kappa1", complex_json(a)},
                                       {"kappa2", complex_json(b)},
                                       {"omega", complex_json(pred.omega)}});
                } catch (const no_flat_band&) {
                    defects.push_back({{"kappa1", complex_json(a)},
                                       {"kappa2", complex_json(b)},
                                       {"omega", nullptr}});
                }
            }
            json j;
            j["defect_frequencies"] = defects;
            if (figure == 3) j["vorticity"] = std::lround(vorticity(spec));
            sub.write_json("figure_summary.json", j);
            merge(sub);
            break;
        }
        case 5:
        case 6: {
            const std::vector<std::pair<complexd, complexd>> sets =
                figure == 5 ? std::vector<std::pair<complexd, complexd>>{
                                  {{1.0, 0.8}, {1.0, -0.6}},
                                  {{1.0, 0.7}, {1.0, -0.7}},
                                  {{1.0, 0.6}, {1.0, -0.8}}}
                            : std::vector<std::pair<complexd, complexd>>{
                                  {{1.0, 1.38}, {1.0, -1.42}},
                                  {{1.0, 1.4}, {1.0, -1.4}},
                                  {{1.0, 1.42}, {1.0, -1.38}}};
            const char* tags[3] = {"a", "b", "c"};
            for (int s = 0; s < 3; ++s) {
                auto sub = with_kappa(sets[s].first, sets[s].second);
                sub.out_dir = ctx.out_dir;
                auto spec = compute_bands(sub);
                auto t1 = phase_factor_trace(spec, sub.cfg.material(), 0);
                auto t2 = phase_factor_trace(spec, sub.cfg.material(), 1);
                auto f = sub.open(std::string("phasefactor_") + tags[s] + ".csv");
                CsvWriter csv(f, {"alpha", "re_phase1", "im_phase1", "re_phase2", "im_phase2"});
                for (std::size_t i = 0; i < spec.alphas.size(); ++i)
                    csv.row({spec.alphas[i], t1[i].real(), t1[i].imag(), t2[i].real(),
                             t2[i].imag()});
                merge(sub);
            }
            break;
        }
        case 8:
        case 9: {
            auto sub = figure == 8 ? with_kappa({1.0, 1.38}, {1.0, -1.42})
                                   : with_kappa({1.0, 0.8}, {1.0, -0.6});
            sub.out_dir = ctx.out_dir;
            sub.cfg.cells = 12;
            run_finite(sub, devnull);
            merge(sub);
            break;
        }
        case 10: {
            auto sub = with_kappa({1.0, -0.5}, {1.0, 0.5});
            sub.out_dir = ctx.out_dir;
            sub.cfg.cells = 12;
            run_geomdefect(sub, devnull);
            merge(sub);
            break;
        }
        case 11: {
            auto sub = with_kappa({1.0, 1.38}, {1.0, -1.42});
            sub.out_dir = ctx.out_dir;
            run_defect(sub, devnull, /*emit_mu=*/true);
            merge(sub);
            break;
        }
        default:
            throw config_error("unknown figure id " + std::to_string(figure) +
                               " (expected 2, 3, 5, 6, 8, 9, 10, 11)");
    }
    os << "figure " << figure << " datasets written\n";
    ctx.write_manifest("reproduce");
    return 0;
}

} // namespace nhchain::cli
