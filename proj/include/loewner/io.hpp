#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "loewner/chains.hpp"
#include "loewner/continuous.hpp"
#include "loewner/families.hpp"
#include "loewner/normalize.hpp"
#include "loewner/scenarios.hpp"

namespace loewner::io {

using json = nlohmann::ordered_json;

inline json complex_to_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

inline cplx complex_from_json(const json& j) {
    if (!j.is_object() || !j.contains("re") || !j.contains("im"))
        throw contract_violation("complex value must be an object with re/im");
    return cplx(j.at("re").get<double>(), j.at("im").get<double>());
}

inline json jet_to_json(const JetMap& f) {
    json comps = json::array();
    for (int j = 0; j < f.dim(); ++j) {
        json monos = json::array();
        for (const auto& [idx, c] : f.component(j)) {
            json m;
            m["index"] = idx.entries();
            m["re"] = c.real();
            m["im"] = c.imag();
            monos.push_back(std::move(m));
        }
        comps.push_back(json{{"monomials", std::move(monos)}});
    }
    return json{{"dim", f.dim()}, {"degree", f.degree()}, {"components", std::move(comps)}};
}

inline JetMap jet_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    const int degree = j.at("degree").get<int>();
    JetMap f(dim, degree);
    const auto& comps = j.at("components");
    if (static_cast<int>(comps.size()) != dim)
        throw contract_violation("jet: components array must have dim entries");
    for (int c = 0; c < dim; ++c) {
        for (const auto& m : comps.at(c).at("monomials")) {
            std::vector<int> idx = m.at("index").get<std::vector<int>>();
            f.set(c, MultiIndex(std::move(idx)),
                  cplx(m.at("re").get<double>(), m.at("im").get<double>()));
        }
    }
    return f;
}

inline json spectrum_to_json(const Spectrum& s) {
    json values = json::array();
    const bool cont = s.mode() == SpectrumMode::continuous;
    for (int j = 0; j < s.dim(); ++j)
        values.push_back(complex_to_json(cont ? s.alpha(j) : s.lambda(j)));
    return json{{"mode", cont ? "continuous" : "discrete"}, {"values", std::move(values)}};
}

inline Spectrum spectrum_from_json(const json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    std::vector<cplx> values;
    for (const auto& v : j.at("values")) values.push_back(complex_from_json(v));
    if (mode == "continuous") return Spectrum::continuous(std::move(values));
    if (mode == "discrete") return Spectrum::discrete(std::move(values));
    throw contract_violation("spectrum: mode must be continuous or discrete");
}

inline json resonance_report_to_json(const ResonanceReport& r) {
    auto entry = [](const ResonanceEntry& e) {
        return json{{"target", e.target + 1},
                    {"index", e.index.entries()},
                    {"kind", e.kind == ResonanceKind::complex_res ? "complex" : "real-pure"},
                    {"defect", e.defect}};
    };
    json entries = json::array(), near = json::array();
    for (const auto& e : r.entries) entries.push_back(entry(e));
    for (const auto& e : r.near_entries) near.push_back(entry(e));
    return json{{"max_degree", r.max_degree},
                {"tolerance", r.tolerance},
                {"entries", std::move(entries)},
                {"near_resonances", std::move(near)}};
}

inline ScenarioParams scenario_params_from_json(const json& j);

inline json family_to_json(const DiscreteFamily& f) {
    json steps = json::array();
    for (const auto& s : f.steps()) steps.push_back(jet_to_json(s));
    return json{{"spectrum", spectrum_to_json(f.spectrum())},
                {"degree", f.degree()},
                {"steps", std::move(steps)}};
}

inline DiscreteFamily family_from_json(const json& j) {
    if (j.contains("generator")) {
        const auto& g = j.at("generator");
        const std::string kind = g.at("kind").get<std::string>();
        if (kind == "scenario") {
            ScenarioParams p;
            if (g.contains("params")) p = scenario_params_from_json(g.at("params"));
            Scenario sc = build_scenario(scenario_from_string(g.at("name").get<std::string>()), p);
            if (!sc.family) throw contract_violation("scenario has no family");
            return *sc.family;
        }
        Spectrum spec = spectrum_from_json(j.at("spectrum"));
        const int degree = j.at("degree").get<int>();
        if (kind == "periodic") {
            std::vector<JetMap> pattern;
            if (g.contains("pattern"))
                for (const auto& s : g.at("pattern")) pattern.push_back(jet_from_json(s));
            else
                pattern.push_back(jet_from_json(g.at("step")));
            return DiscreteFamily(spec, cycle_steps(pattern, g.at("horizon").get<int>()), degree);
        }
        if (kind == "table") {
            std::vector<JetMap> steps;
            for (const auto& s : g.at("steps")) steps.push_back(jet_from_json(s));
            return DiscreteFamily(spec, std::move(steps), degree);
        }
        throw contract_violation("family generator kind must be periodic, table or scenario");
    }
    Spectrum spec = spectrum_from_json(j.at("spectrum"));
    const int degree = j.at("degree").get<int>();
    std::vector<JetMap> steps;
    for (const auto& s : j.at("steps")) steps.push_back(jet_from_json(s));
    return DiscreteFamily(spec, std::move(steps), degree);
}

inline json herglotz_to_json(const HerglotzSpec& h) {
    json sched = json::array();
    for (const auto& p : h.schedule())
        sched.push_back(json{{"t_start", p.t_start},
                             {"t_end", p.t_end},
                             {"perturbation", jet_to_json(p.perturbation)}});
    return json{{"spectrum", spectrum_to_json(h.spectrum())},
                {"degree", h.degree()},
                {"T", h.horizon_time()},
                {"schedule", std::move(sched)}};
}

inline HerglotzSpec herglotz_from_json(const json& j) {
    Spectrum spec = spectrum_from_json(j.at("spectrum"));
    const int degree = j.at("degree").get<int>();
    const double T = j.at("T").get<double>();
    std::vector<SchedulePiece> sched;
    if (j.contains("schedule"))
        for (const auto& p : j.at("schedule"))
            sched.push_back({p.at("t_start").get<double>(), p.at("t_end").get<double>(),
                             jet_from_json(p.at("perturbation"))});
    return HerglotzSpec(std::move(spec), degree, T, std::move(sched));
}

inline json normality_to_json(const NormalityDiagnostic& d) {
    return json{{"weights", d.weights},
                {"slope", d.slope},
                {"max_weight", d.max_weight},
                {"doubling_ratio", d.doubling_ratio},
                {"verdict", to_string(d.verdict)}};
}

inline json chain_to_json(const ChainJets& c, const NormalityDiagnostic* d = nullptr,
                          double subordination = -1.0) {
    json entries = json::array();
    for (int n = 0; n <= c.horizon(); ++n) entries.push_back(jet_to_json(c.entry(n)));
    json out{{"spectrum", spectrum_to_json(c.spectrum())},
             {"degree", c.degree()},
             {"provenance", c.provenance()},
             {"entries", std::move(entries)},
             {"normality", d ? normality_to_json(*d) : json(nullptr)}};
    if (subordination >= 0.0) out["subordination_residual"] = subordination;
    return out;
}

inline ChainJets chain_from_json(const json& j) {
    Spectrum spec = spectrum_from_json(j.at("spectrum"));
    const int degree = j.at("degree").get<int>();
    std::vector<JetMap> weighted;
    int n = 0;
    for (const auto& e : j.at("entries")) {
        JetMap raw = jet_from_json(e);
        JetMap w = scale_components(detail::lambda_powers(spec, n), raw);
        // the stored linear part is diag(lambda)^{-n}; rescaling must give
        // the identity back up to rounding, which is then snapped exact
        const Mat lin = w.linear_part();
        for (int a = 0; a < spec.dim(); ++a)
            for (int b = 0; b < spec.dim(); ++b) {
                const cplx expect = a == b ? cplx(1.0) : cplx(0.0);
                if (std::abs(lin[a][b] - expect) > 1e-9)
                    throw contract_violation("chain entry " + std::to_string(n) +
                                             ": linear part is not diag(lambda)^{-n}");
            }
        w.set_linear_part(detail::mat_identity(spec.dim()));
        weighted.push_back(std::move(w));
        ++n;
    }
    std::string prov = j.contains("provenance") ? j.at("provenance").get<std::string>() : "stored";
    return ChainJets(std::move(spec), degree, std::move(weighted), std::move(prov));
}

inline json normalization_to_json(const NormalizationResult& r) {
    json stages = json::array();
    for (const auto& st : r.stages) {
        json shears = json::array();
        for (const auto& k : st.shears) shears.push_back(jet_to_json(k));
        stages.push_back(json{{"degree", st.degree_i},
                              {"max_residual", st.max_residual},
                              {"resonant_update_empty", st.resonant_update_empty},
                              {"conjugators", std::move(shears)}});
    }
    json tri = json::array(), cum = json::array(), fin = json::array();
    for (const auto& t : r.triangular_steps) tri.push_back(jet_to_json(t));
    for (const auto& k : r.cumulative) cum.push_back(jet_to_json(k));
    for (const auto& p : r.final_steps) fin.push_back(jet_to_json(p));
    json warnings = json::array();
    for (const auto& w : r.warnings)
        warnings.push_back(json{{"target", w.target + 1},
                                {"index", w.index.entries()},
                                {"defect", w.defect},
                                {"ratio", w.ratio},
                                {"stage", w.stage}});
    return json{{"spectrum", spectrum_to_json(r.spectrum)},
                {"degree", r.degree},
                {"horizon", r.horizon},
                {"q", r.q},
                {"l", r.l},
                {"gamma", r.gamma},
                {"beta", r.beta},
                {"final_stage", r.final_stage},
                {"residual_norms", r.residual_norms},
                {"stages", std::move(stages)},
                {"triangular_steps", std::move(tri)},
                {"cumulative_conjugators", std::move(cum)},
                {"normalized_steps", std::move(fin)},
                {"resonances", resonance_report_to_json(r.resonances)},
                {"warnings", std::move(warnings)},
                {"triangular_coeff_bound", r.triangular_coeff_bound},
                {"conjugator_coeff_bound", r.conjugator_coeff_bound}};
}

inline json continuous_chain_to_json(const ContinuousChain& c) {
    json entries = json::array();
    for (const auto& e : c.entries) entries.push_back(jet_to_json(e));
    return json{{"times", c.times},
                {"degree", c.degree},
                {"entries", std::move(entries)},
                {"weights", c.weights},
                {"j_independence_delta", c.j_independence_delta},
                {"transfer_factor", c.transfer_factor},
                {"max_discrete_weight", c.max_discrete_weight},
                {"normality_transfer_ok", c.normality_transfer_ok}};
}

inline json scenario_report_to_json(const ScenarioReport& r) {
    json asserts = json::array();
    for (const auto& a : r.assertions)
        asserts.push_back(json{{"claim", a.claim},
                               {"paper_ref", a.ref},
                               {"pass", a.pass},
                               {"detail", a.detail}});
    return json{{"name", r.name},
                {"assertions", std::move(asserts)},
                {"warnings", r.warnings},
                {"all_pass", r.all_pass()}};
}

inline ScenarioParams scenario_params_from_json(const json& j) {
    ScenarioParams p;
    auto get_cplx = [&](const char* key, cplx& slot) {
        if (j.contains(key)) slot = complex_from_json(j.at(key));
    };
    auto get_num = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get_cplx("alpha1", p.alpha1);
    get_cplx("alpha2", p.alpha2);
    get_cplx("lambda1", p.lambda1);
    get_cplx("lambda2", p.lambda2);
    get_num("c", p.c);
    get_num("r", p.r);
    get_num("lambda1_mod", p.lambda1_mod);
    get_num("theta", p.theta);
    get_num("arcs", p.arcs);
    get_num("germ_amp", p.germ_amp);
    get_num("horizon", p.horizon);
    get_num("degree", p.degree);
    return p;
}

} // namespace loewner::io
