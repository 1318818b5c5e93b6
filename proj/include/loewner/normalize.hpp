#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "loewner/families.hpp"
#include "loewner/jet.hpp"
#include "loewner/spectrum.hpp"

namespace loewner {

struct NormalizeOptions {
    double eps_res = 1e-9;     // modulus defects below this are resonant (kept in T)
    double warn_band = 1e-3;   // defects in (eps_res, warn_band] proceed with a warning
    double alpha_cap = 1e12;   // shear coefficient cap; beyond it the stage aborts
    double tol = 1e-9;         // residual certificate tolerance
};

enum class HomologicalBranch { forward, backward, resonant };

// One solved coefficient sequence alpha^{(j)}_{I,n} of the homological
// equation lambda^I alpha_{n+1} + a_n = lambda_j alpha_n.
struct HomologicalSolution {
    int target = 0;
    MultiIndex index = MultiIndex::zero(1);
    std::vector<cplx> alphas;  // n = 0..horizon
    HomologicalBranch branch = HomologicalBranch::resonant;
    double divisor_ratio = 1.0;  // contraction ratio < 1 off resonance
    double defect = 0.0;
    bool near_resonance = false;
};

struct SmallDivisorWarning {
    int target = 0;
    MultiIndex index = MultiIndex::zero(1);
    double defect = 0.0;
    double ratio = 0.0;
    int stage = 0;
};

// Solves the homological recurrence for one (j, I).  Forward branch
// (|lambda_j| < |lambda^I|): alpha_0 = 0 and the recursion runs up in n.
// Backward branch (|lambda_j| > |lambda^I|): the geometric tail sum, which
// at finite horizon (a_n = 0 for n >= horizon) is the exact finite sum,
// evaluated by the reversed recursion alpha_n = (lambda^I alpha_{n+1} +
// a_n)/lambda_j from alpha_horizon = 0.  Within eps_res of modulus equality
// the pair is resonant and the solution is identically zero.
inline HomologicalSolution solve_homological(const Spectrum& spec, int j, const MultiIndex& idx,
                                             std::span<const cplx> a_sequence, int horizon,
                                             const NormalizeOptions& opt = {}) {
    if (j < 0 || j >= spec.dim()) throw contract_violation("solve_homological: bad target");
    if (idx.order() < 2) throw contract_violation("solve_homological: need |I| >= 2");
    if (static_cast<int>(a_sequence.size()) < horizon)
        throw contract_violation("solve_homological: sequence shorter than horizon");

    HomologicalSolution sol;
    sol.target = j;
    sol.index = idx;
    sol.defect = spec.modulus_defect(j, idx);
    sol.alphas.assign(horizon + 1, cplx(0.0));

    const cplx lam_j = spec.lambda(j);
    const cplx lam_I = spec.lambda_power(idx);
    if (sol.defect <= opt.eps_res) {
        sol.branch = HomologicalBranch::resonant;
        sol.divisor_ratio = 1.0;
        return sol;
    }
    sol.near_resonance = sol.defect <= opt.warn_band;
    const bool forward = std::abs(lam_j) < std::abs(lam_I);
    sol.branch = forward ? HomologicalBranch::forward : HomologicalBranch::backward;
    sol.divisor_ratio = forward ? std::abs(lam_j / lam_I) : std::abs(lam_I / lam_j);

    if (forward) {
        for (int n = 0; n < horizon; ++n)
            sol.alphas[n + 1] = (lam_j * sol.alphas[n] - a_sequence[n]) / lam_I;
    } else {
        for (int n = horizon - 1; n >= 0; --n)
            sol.alphas[n] = (lam_I * sol.alphas[n + 1] + a_sequence[n]) / lam_j;
    }
    for (const auto& a : sol.alphas)
        if (std::abs(a) > opt.alpha_cap)
            throw small_divisor_error(j, idx.entries(), std::abs(a),
                                      "homological coefficient above cap at (" +
                                          std::to_string(j + 1) + ", " + idx.to_string() + ")");
    return sol;
}

namespace detail {

// Ordered composition of the elementary shears of one stage, graded-lex
// ascending on (I, j): the first pair in that order ends up outermost.
inline JetMap compose_shears(int dim, int degree,
                             const std::vector<std::pair<std::pair<MultiIndex, int>, cplx>>& shears) {
    JetMap acc = JetMap::identity(dim, degree);
    bool nontrivial = false;
    for (const auto& [key, alpha] : shears) {
        if (alpha == cplx(0.0)) continue;
        JetMap s = JetMap::identity(dim, degree);
        s.add_to(key.second, key.first, alpha);
        acc = nontrivial ? compose(acc, s) : s;
        nontrivial = true;
    }
    return acc;
}

} // namespace detail

struct StageResult {
    int degree_i = 0;
    std::vector<JetMap> shears;            // k_n, n = 0..horizon, tangent to identity
    std::vector<JetMap> next_steps;        // phi^{i+1}_{n,n+1}
    std::vector<JetMap> triangular_steps;  // T^{i+1}_{n,n+1}
    std::vector<HomologicalSolution> solutions;
    std::vector<SmallDivisorWarning> warnings;
    double max_residual = 0.0;      // coeff norm of phi^{i+1} - T^{i+1} at degrees <= i
    bool resonant_update_empty = true;  // R^i == 0
};

// One Poincare-Dulac stage: split the degree-i homogeneous parts into
// resonant terms (absorbed into T) and non-resonant terms (removed through
// the homological shears), then conjugate the whole family.
inline StageResult stage_eliminate(const std::vector<JetMap>& phi_steps,
                                   const std::vector<JetMap>& t_steps, const Spectrum& spec, int i,
                                   const NormalizeOptions& opt = {}) {
    if (phi_steps.empty() || phi_steps.size() != t_steps.size())
        throw contract_violation("stage_eliminate: step lists empty or mismatched");
    const int dim = spec.dim();
    const int D = phi_steps.front().degree();
    if (i < 2 || i > D) throw contract_violation("stage_eliminate: need 2 <= i <= degree");
    const int horizon = static_cast<int>(phi_steps.size());

    StageResult out;
    out.degree_i = i;
    out.triangular_steps = t_steps;

    // one shear coefficient sequence per non-resonant (I, j); graded-lex
    // ascending on (I, j) fixes the composition order
    std::vector<std::vector<std::pair<std::pair<MultiIndex, int>, cplx>>> shear_table(horizon + 1);
    for (const auto& idx : multi_indices_of_degree(dim, i)) {
        for (int j = 0; j < dim; ++j) {
            const double defect = spec.modulus_defect(j, idx);
            if (defect <= opt.eps_res) {
                // resonant slot: coefficients stay, T picks them up
                for (int n = 0; n < horizon; ++n) {
                    const cplx a = phi_steps[n].coeff(j, idx);
                    if (a != cplx(0.0)) {
                        out.triangular_steps[n].add_to(j, idx, a);
                        out.resonant_update_empty = false;
                    }
                }
                continue;
            }
            std::vector<cplx> a_seq(horizon);
            bool any = false;
            for (int n = 0; n < horizon; ++n) {
                a_seq[n] = phi_steps[n].coeff(j, idx);
                if (a_seq[n] != cplx(0.0)) any = true;
            }
            if (!any) continue;
            HomologicalSolution sol = solve_homological(spec, j, idx, a_seq, horizon, opt);
            if (sol.near_resonance)
                out.warnings.push_back({j, idx, sol.defect, sol.divisor_ratio, i});
            for (int n = 0; n <= horizon; ++n)
                shear_table[n].push_back({{idx, j}, sol.alphas[n]});
            out.solutions.push_back(std::move(sol));
        }
    }

    out.shears.reserve(horizon + 1);
    for (int n = 0; n <= horizon; ++n)
        out.shears.push_back(detail::compose_shears(dim, D, shear_table[n]));

    out.next_steps.reserve(horizon);
    for (int n = 0; n < horizon; ++n) {
        JetMap conj = compose(compose(out.shears[n + 1], phi_steps[n]), invert(out.shears[n]));
        JetMap diff = conj - out.triangular_steps[n];
        for (int d = 1; d <= i; ++d)
            out.max_residual = std::max(out.max_residual, coefficient_norm(diff, d));
        out.next_steps.push_back(std::move(conj));
    }
    return out;
}

struct StageRecord {
    int degree_i = 0;
    std::vector<JetMap> shears;
    double max_residual = 0.0;
    bool resonant_update_empty = true;
};

struct NormalizationResult {
    Spectrum spectrum;
    int degree = 0;
    int horizon = 0;
    int q = 0;            // resonance cutoff degree
    int l = 0;            // Koenigs degree from the certified beta
    double gamma = 0.0;
    double beta = 0.0;
    int final_stage = 0;  // last eliminated degree, min(degree, l)
    std::vector<StageRecord> stages;
    std::vector<double> residual_norms;
    std::vector<JetMap> triangular_steps;  // final T_{n,n+1}
    std::vector<JetMap> final_steps;       // phi^{final}_{n,n+1}
    std::vector<JetMap> cumulative;        // k^{final}_n, n = 0..horizon
    ResonanceReport resonances;
    std::vector<SmallDivisorWarning> warnings;
    double triangular_coeff_bound = 0.0;
    double conjugator_coeff_bound = 0.0;
    std::shared_ptr<const TriangularFamily> triangular;

    NormalizationResult(Spectrum s) : spectrum(std::move(s)) {}
};

// Full parametric Poincare-Dulac pass: stages i = 2..min(D, q) stabilize the
// triangular part (no resonant term has degree >= q), the certified
// gamma/beta of that triangular family give the Koenigs degree l >= q, and
// the remaining stages keep eliminating non-resonant terms through the full
// jet degree.  Stages past l do not affect the Koenigs certificate; they
// close the elimination at jet level, which pins every chain entry at any
// horizon (stopping at l would leave residual degrees whose tail entries a
// finite family cannot determine to tolerance).
inline NormalizationResult normalize_family(const DiscreteFamily& family,
                                            const NormalizeOptions& opt = {}) {
    const Spectrum& spec = family.spectrum();
    const int D = family.degree();
    if (D < 2) throw contract_violation("normalize_family: degree must be >= 2");
    const int H = family.horizon();

    NormalizationResult res(spec);
    res.degree = D;
    res.horizon = H;
    res.resonances = enumerate_resonances(spec, D, opt.eps_res);
    res.q = resonance_cutoff_q(spec);

    std::vector<JetMap> phi = family.steps();
    std::vector<JetMap> tri(H, JetMap::diagonal(spec.lambdas(), D));
    std::vector<JetMap> cum(H + 1, JetMap::identity(spec.dim(), D));

    auto run_stage = [&](int i) {
        StageResult st = stage_eliminate(phi, tri, spec, i, opt);
        if (i >= res.q && !st.resonant_update_empty)
            throw std::logic_error("normalize_family: resonant term appeared at degree >= q");
        phi = st.next_steps;
        tri = st.triangular_steps;
        for (int n = 0; n <= H; ++n) cum[n] = compose(st.shears[n], cum[n]);
        res.residual_norms.push_back(st.max_residual);
        res.warnings.insert(res.warnings.end(), st.warnings.begin(), st.warnings.end());
        res.stages.push_back({i, std::move(st.shears), st.max_residual, st.resonant_update_empty});
        res.final_stage = i;
    };

    for (int i = 2; i <= std::min(D, res.q); ++i) run_stage(i);

    res.triangular = std::make_shared<const TriangularFamily>(spec, tri, D);
    const GrowthConstants g = res.triangular->growth_constants();
    res.gamma = g.gamma;
    res.beta = g.beta;
    res.l = koenigs_degree_l(spec, g.beta);

    for (int i = std::min(D, res.q) + 1; i <= D; ++i) run_stage(i);

    res.triangular_steps = tri;
    res.final_steps = std::move(phi);
    res.cumulative = std::move(cum);
    for (const auto& t : res.triangular_steps)
        res.triangular_coeff_bound = std::max(res.triangular_coeff_bound, coefficient_norm(t));
    for (const auto& k : res.cumulative)
        res.conjugator_coeff_bound = std::max(res.conjugator_coeff_bound, coefficient_norm(k));
    return res;
}

// Failure to linearize a single germ: a complex resonance blocks the
// divisor.
class complex_resonance_error : public std::runtime_error {
public:
    complex_resonance_error(int target, std::vector<int> index, const std::string& what)
        : std::runtime_error(what), target_(target), index_(std::move(index)) {}
    int target() const { return target_; }
    const std::vector<int>& index() const { return index_; }

private:
    int target_;
    std::vector<int> index_;
};

// Classical Poincare linearization of one germ with linear part
// diag(lambda): returns h tangent to identity with h o phi = A o h up to the
// jet degree.  Serves as the oracle for periodic families.
inline JetMap autonomous_linearize(const JetMap& map, const Spectrum& spec,
                                   const NormalizeOptions& opt = {}) {
    const int dim = map.dim(), D = map.degree();
    if (dim != spec.dim()) throw contract_violation("autonomous_linearize: dimension mismatch");
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
            const cplx expect = (j == k) ? spec.lambda(j) : cplx(0.0);
            if (map.coeff(j, MultiIndex::unit(dim, k)) != expect)
                throw contract_violation(
                    "autonomous_linearize: linear part must equal diag(lambda) exactly");
        }

    JetMap psi = map;
    JetMap h = JetMap::identity(dim, D);
    for (int i = 2; i <= D; ++i) {
        std::vector<std::pair<std::pair<MultiIndex, int>, cplx>> shears;
        for (const auto& idx : multi_indices_of_degree(dim, i)) {
            for (int j = 0; j < dim; ++j) {
                const cplx c = psi.coeff(j, idx);
                if (c == cplx(0.0)) continue;
                const cplx divisor = spec.lambda(j) - spec.lambda_power(idx);
                if (std::abs(divisor) <= opt.eps_res)
                    throw complex_resonance_error(
                        j, idx.entries(),
                        "complex resonance at (" + std::to_string(j + 1) + ", " + idx.to_string() +
                            ") obstructs linearization");
                shears.push_back({{idx, j}, c / divisor});
            }
        }
        if (shears.empty()) continue;
        JetMap k = detail::compose_shears(dim, D, shears);
        psi = compose(compose(k, psi), invert(k));
        h = compose(k, h);
    }
    return h;
}

} // namespace loewner
