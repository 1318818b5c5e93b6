#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loewner/io.hpp"

namespace loewner::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verify_failed = 1;
inline constexpr int parse_error = 2;
inline constexpr int small_divisor = 3;
inline constexpr int non_convergence = 4;
} // namespace exit_code

namespace detail {

inline io::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw contract_violation("cannot open input file: " + path);
    io::json j;
    in >> j;
    return j;
}

inline void emit(const io::json& doc, const std::string& out_path, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw contract_violation("cannot open output file: " + out_path);
    f << text;
    out << io::json{{"written", out_path}}.dump() << "\n";
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::pair<double, double>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw contract_violation("cannot open output file: " + path);
    f << header << "\n";
    for (const auto& [a, b] : rows) f << fmt17(a) << "," << fmt17(b) << "\n";
}

// deterministic sample points of radius r for the PDE residual probes
inline std::vector<std::vector<cplx>> sample_points(int dim, double radius, int count,
                                                    unsigned long long seed) {
    std::mt19937_64 rng(seed ^ 0x5EEDULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<cplx>> pts;
    for (int i = 0; i < count; ++i) {
        std::vector<cplx> z(dim);
        double n2 = 0.0;
        for (auto& v : z) {
            v = cplx(gauss(rng), gauss(rng));
            n2 += std::norm(v);
        }
        const double s = radius / std::sqrt(n2);
        for (auto& v : z) v *= s;
        pts.push_back(std::move(z));
    }
    return pts;
}

} // namespace detail

struct RunConfig {
    int degree = 6;
    double tol_res = 1e-9;
    double tol_conv = 1e-11;
    int horizon = 0;
    double step = 1e-3;
    unsigned long long seed = 0;
    bool plot_data = false;
    std::string out_path;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"jet-level normalization and Loewner-chain computations for dilation "
                 "evolution families"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--degree", cfg.degree, "jet truncation degree / resonance scan depth");
    app.add_option("--tol-res", cfg.tol_res, "resonance modulus tolerance");
    app.add_option("--tol-conv", cfg.tol_conv, "limit convergence tolerance");
    app.add_option("--horizon", cfg.horizon, "override horizon (scenario subcommand)");
    app.add_option("--step", cfg.step, "integrator step");
    app.add_option("--seed", cfg.seed, "seed for sampled probes");
    app.add_flag("--plot-data", cfg.plot_data, "emit CSV tables next to --out");
    app.add_option("--out", cfg.out_path, "output file (stdout when omitted)");

    std::string input_file, scenario_name, family_file, chain_file, params_file;
    std::vector<double> times;

    // global flags may follow the subcommand; unmatched arguments fall
    // through to the parent parser
    auto* c_res = app.add_subcommand("resonances", "classify resonances of a spectrum");
    c_res->fallthrough();
    c_res->add_option("spectrum", input_file, "spectrum JSON file")->required();

    auto* c_norm = app.add_subcommand("normalize", "triangular normal form of a family");
    c_norm->fallthrough();
    c_norm->add_option("family", input_file, "family JSON file")->required();

    auto* c_chain = app.add_subcommand("chain", "associated chain of a family or field");
    c_chain->fallthrough();
    c_chain->add_option("input", input_file, "family or Herglotz-field JSON file")->required();
    c_chain->add_option("--times", times, "real sample times (Herglotz input)");

    auto* c_scen = app.add_subcommand("scenario", "run a named scenario's assertion suite");
    c_scen->fallthrough();
    c_scen->add_option("name", scenario_name, "scenario name")->required();
    c_scen->add_option("--params", params_file, "scenario parameter JSON file");

    auto* c_verify = app.add_subcommand("verify", "re-check a stored chain against a family");
    c_verify->fallthrough();
    c_verify->add_option("--family", family_file, "family JSON file")->required();
    c_verify->add_option("--chain", chain_file, "chain JSON file")->required();

    try {
        try {
            // the vector overload consumes arguments from the back
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            out << app.help();
            return exit_code::ok;
        } catch (const CLI::ParseError& e) {
            throw contract_violation(std::string("argument error: ") + e.what());
        }

        if (c_res->parsed()) {
            const io::json in = detail::load_json_file(input_file);
            const Spectrum spec = io::spectrum_from_json(in);
            const auto report = enumerate_resonances(spec, cfg.degree, cfg.tol_res);
            io::json doc{{"command", "resonances"},
                         {"spectrum", io::spectrum_to_json(spec)},
                         {"input_reordered", spec.was_reordered()},
                         {"sorted_order", spec.sorted_order()},
                         {"note", "values sorted into canonical order; entry targets refer to "
                                  "sorted positions (1-based)"},
                         {"report", io::resonance_report_to_json(report)}};
            detail::emit(doc, cfg.out_path, out);
            return exit_code::ok;
        }

        if (c_norm->parsed()) {
            const io::json in = detail::load_json_file(input_file);
            const DiscreteFamily family = io::family_from_json(in);
            NormalizeOptions opt;
            opt.eps_res = cfg.tol_res;
            const auto result = normalize_family(family, opt);
            io::json doc{{"command", "normalize"}, {"result", io::normalization_to_json(result)}};
            detail::emit(doc, cfg.out_path, out);
            return exit_code::ok;
        }

        if (c_chain->parsed()) {
            const io::json in = detail::load_json_file(input_file);
            const bool herglotz = in.contains("schedule") || in.contains("T");
            NormalizeOptions nopt;
            nopt.eps_res = cfg.tol_res;
            ChainOptions copt;
            copt.conv_tol = cfg.tol_conv;
            io::json doc{{"command", "chain"}};

            std::optional<DiscreteFamily> family;
            std::optional<HerglotzSpec> field;
            if (herglotz) {
                field.emplace(io::herglotz_from_json(in));
                family.emplace(discretize(*field, {cfg.step}));
            } else {
                family.emplace(io::family_from_json(in));
            }
            const auto norm = normalize_family(*family, nopt);
            const ChainJets chain = build_chain(*family, norm, copt);
            std::optional<NormalityDiagnostic> diag;
            if (chain.horizon() >= 8) diag = normality_diagnostic(chain);
            const double sub = subordination_residual(chain, *family);
            doc["discrete"] = io::chain_to_json(chain, diag ? &*diag : nullptr, sub);

            if (field && !times.empty()) {
                const ContinuousChain cont =
                    extend_to_real_times(chain, *field, times, {cfg.step});
                doc["continuous"] = io::continuous_chain_to_json(cont);
                // PDE residuals at interior sample times of a uniform grid
                io::json residuals = io::json::array();
                const auto samples = detail::sample_points(family->dim(), 0.05, 8, cfg.seed);
                for (size_t i = 1; i + 1 < cont.times.size(); ++i) {
                    const double dl = cont.times[i] - cont.times[i - 1];
                    const double dr = cont.times[i + 1] - cont.times[i];
                    if (std::abs(dl - dr) > 1e-12 * std::max(dl, dr)) continue;
                    residuals.push_back(
                        io::json{{"s", cont.times[i]},
                                 {"residual", pde_residual(cont, *field, cont.times[i], samples)}});
                }
                doc["pde_residuals"] = std::move(residuals);
            }

            if (cfg.plot_data) {
                if (cfg.out_path.empty())
                    throw contract_violation("--plot-data requires --out");
                std::vector<std::pair<double, double>> wrows;
                for (int n = 0; n <= chain.horizon(); ++n)
                    wrows.push_back({static_cast<double>(n),
                                     coefficient_norm_from_degree(chain.weighted_entry(n), 2)});
                detail::write_csv(cfg.out_path + ".weights.csv", "n,weight", wrows);
                if (field) {
                    // integrator order table: one-step semigroup defect per step size
                    std::vector<std::pair<double, double>> orows;
                    double h = cfg.step * 16.0;
                    for (int k = 0; k < 4; ++k) {
                        const JetMap whole = integrate_evolution(*field, 0.0, 1.0, {h});
                        const JetMap halves =
                            compose(integrate_evolution(*field, 0.5, 1.0, {h}),
                                    integrate_evolution(*field, 0.0, 0.5, {h}));
                        orows.push_back({h, coefficient_norm(whole - halves)});
                        h /= 2.0;
                    }
                    detail::write_csv(cfg.out_path + ".order.csv", "step,error", orows);
                }
            }
            detail::emit(doc, cfg.out_path, out);
            return exit_code::ok;
        }

        if (c_scen->parsed()) {
            ScenarioParams p;
            if (!params_file.empty())
                p = io::scenario_params_from_json(detail::load_json_file(params_file));
            if (cfg.horizon > 0) p.horizon = cfg.horizon;
            if (cfg.degree != 6) p.degree = cfg.degree;
            const Scenario sc = build_scenario(scenario_from_string(scenario_name), p);
            const ScenarioReport rep = run_assertions(sc);
            detail::emit(io::scenario_report_to_json(rep), cfg.out_path, out);
            return rep.all_pass() ? exit_code::ok : exit_code::verify_failed;
        }

        if (c_verify->parsed()) {
            const DiscreteFamily family =
                io::family_from_json(detail::load_json_file(family_file));
            const ChainJets chain = io::chain_from_json(detail::load_json_file(chain_file));
            bool pass = true;
            std::string reason;
            if (chain.spectrum().lambdas() != family.spectrum().lambdas()) {
                pass = false;
                reason = "spectrum mismatch";
            }
            double sub = -1.0;
            const double tol = 1e-9;
            if (pass) {
                sub = subordination_residual(chain, family);
                if (sub > tol) {
                    pass = false;
                    reason = "subordination residual above tolerance";
                }
            }
            io::json doc{{"command", "verify"},
                         {"pass", pass},
                         {"subordination_residual", sub},
                         {"tolerance", tol}};
            if (!reason.empty()) doc["reason"] = reason;
            if (pass && chain.horizon() >= 8)
                doc["normality"] = io::normality_to_json(normality_diagnostic(chain));
            detail::emit(doc, cfg.out_path, out);
            return pass ? exit_code::ok : exit_code::verify_failed;
        }

        throw contract_violation("no subcommand given");
    } catch (const small_divisor_error& e) {
        io::json payload{{"error",
                          {{"kind", "small_divisor"},
                           {"message", e.what()},
                           {"target", e.target() + 1},
                           {"index", e.index()},
                           {"magnitude", e.magnitude()}}}};
        err << payload.dump(2) << "\n";
        return exit_code::small_divisor;
    } catch (const non_convergence_error& e) {
        io::json payload{{"error",
                          {{"kind", "non_convergence"},
                           {"message", e.what()},
                           {"residual_history", e.residual_history()}}}};
        err << payload.dump(2) << "\n";
        return exit_code::non_convergence;
    } catch (const io::json::exception& e) {
        err << io::json{{"error", {{"kind", "parse"}, {"message", e.what()}}}}.dump(2) << "\n";
        return exit_code::parse_error;
    } catch (const std::exception& e) {
        err << io::json{{"error", {{"kind", "invalid_input"}, {"message", e.what()}}}}.dump(2)
            << "\n";
        return exit_code::parse_error;
    }
}

} // namespace loewner::cli
