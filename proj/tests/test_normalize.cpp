#include <catch2/catch_amalgamated.hpp>

#include "loewner/normalize.hpp"
#include "test_util.hpp"

using namespace loewner;
using testutil::random_in_disk;

TEST_CASE("homological solver: autonomous closed forms", "[normalize]") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int H = 200;

    // pinned forward case: |lambda_2| < |lambda_1^2|
    {
        const Spectrum spec = Spectrum::discrete({std::polar(0.8, 0.4), cplx(0.3)});
        const cplx a(0.2, -0.35);
        std::vector<cplx> seq(H, a);
        const auto sol = solve_homological(spec, 1, MultiIndex({2, 0}), seq, H);
        REQUIRE(sol.branch == HomologicalBranch::forward);
        REQUIRE(sol.alphas[0] == cplx(0.0));
        const cplx closed = a / (spec.lambda(1) - spec.lambda_power(MultiIndex({2, 0})));
        REQUIRE(std::abs(sol.alphas[H] - closed) <= 1e-12);
    }
    // pinned backward case: |lambda_2| > |lambda_1^2| with contraction ratio
    // 0.72, so the finite-horizon tail is far below the tolerance
    {
        const Spectrum spec = Spectrum::discrete({cplx(0.6), std::polar(0.5, 1.0)});
        const cplx a(0.4, 0.1);
        std::vector<cplx> seq(H, a);
        const auto sol = solve_homological(spec, 1, MultiIndex({2, 0}), seq, H);
        REQUIRE(sol.branch == HomologicalBranch::backward);
        const cplx closed = a / (spec.lambda(1) - spec.lambda_power(MultiIndex({2, 0})));
        REQUIRE(std::abs(sol.alphas[0] - closed) <= 1e-12);
    }

    // randomized draws: closed form at the settled end, recurrence everywhere
    for (int trial = 0; trial < 60; ++trial) {
        const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 4, 0.3, 0.85, 5e-2);
        const auto indices = multi_indices_in_range(2, 2, 4);
        const MultiIndex idx = indices[static_cast<size_t>(u(rng) * indices.size())];
        const int j = u(rng) < 0.5 ? 0 : 1;
        const cplx lam_j = spec.lambda(j);
        const cplx lam_I = spec.lambda_power(idx);
        const double ratio = std::abs(lam_j) < std::abs(lam_I) ? std::abs(lam_j / lam_I)
                                                               : std::abs(lam_I / lam_j);
        if (ratio > 0.8) continue;  // keep the geometric tail negligible
        const cplx a = random_in_disk(rng, 0.5);
        std::vector<cplx> seq(H, a);
        const auto sol = solve_homological(spec, j, idx, seq, H);
        const cplx closed = a / (lam_j - lam_I);
        if (sol.branch == HomologicalBranch::backward) {
            REQUIRE(std::abs(sol.alphas[0] - closed) <= 1e-12);
        } else {
            REQUIRE(sol.branch == HomologicalBranch::forward);
            REQUIRE(sol.alphas[0] == cplx(0.0));
            REQUIRE(std::abs(sol.alphas[H] - closed) <= 1e-12);
        }
        // the recurrence holds at every n
        for (int n = 0; n < H; ++n)
            REQUIRE(std::abs(lam_I * sol.alphas[n + 1] + seq[n] - lam_j * sol.alphas[n]) <= 1e-10);
    }
}

TEST_CASE("homological solver: zero input, resonant refusal, cap", "[normalize]") {
    const Spectrum spec = Spectrum::discrete({cplx(0.7), cplx(0.4)});
    std::vector<cplx> zeros(16, cplx(0.0));
    const auto sol = solve_homological(spec, 1, MultiIndex({2, 0}), zeros, 16);
    for (const auto& v : sol.alphas) REQUIRE(v == cplx(0.0));

    // modulus resonance with distinct values: resonant branch, all zeros,
    // even with nonzero data
    const Spectrum res = Spectrum::discrete({std::polar(0.6, 1.2), cplx(0.36)});
    std::vector<cplx> data(16, cplx(0.3));
    const auto rsol = solve_homological(res, 1, MultiIndex({2, 0}), data, 16);
    REQUIRE(rsol.branch == HomologicalBranch::resonant);
    for (const auto& v : rsol.alphas) REQUIRE(v == cplx(0.0));

    // near-resonance past the cap aborts with the offending pair: at defect
    // ~1e-6 the solution climbs by ~|a|/|lambda_2| per step toward a/(l2-l1^2)
    NormalizeOptions opt;
    opt.alpha_cap = 3e1;
    const Spectrum near = Spectrum::discrete({cplx(0.7), cplx(0.49 + 1e-6)});
    std::vector<cplx> big(64, cplx(0.5));
    try {
        solve_homological(near, 1, MultiIndex({2, 0}), big, 64, opt);
        FAIL("expected small_divisor_error");
    } catch (const small_divisor_error& e) {
        REQUIRE(e.target() == 1);
        REQUIRE(e.index() == std::vector<int>{2, 0});
        REQUIRE(e.magnitude() > 3e1);
    }
}

TEST_CASE("homological solver: backward branch boundedness certificate", "[normalize]") {
    std::mt19937_64 rng(101);
    const Spectrum spec = Spectrum::discrete({cplx(0.8), cplx(0.7)});
    const MultiIndex idx({2, 0});  // |lambda^I| = 0.64 < 0.7 = |lambda_2|: backward
    const int H = 128;
    std::vector<cplx> seq(H);
    double sup_a = 0.0;
    for (auto& v : seq) {
        v = random_in_disk(rng, 0.4);
        sup_a = std::max(sup_a, std::abs(v));
    }
    const auto sol = solve_homological(spec, 1, idx, seq, H);
    REQUIRE(sol.branch == HomologicalBranch::backward);
    const double rho = sol.divisor_ratio;
    const double lam_I = std::abs(spec.lambda_power(idx));
    const double bound = sup_a * rho / (lam_I * (1.0 - rho));
    for (const auto& v : sol.alphas) REQUIRE(std::abs(v) <= bound * (1.0 + 1e-12));
}

TEST_CASE("stage elimination: triangular input is a fixed point", "[normalize]") {
    const std::vector<cplx> lam{cplx(0.7), cplx(0.49)};  // resonant pair lambda_1^2 = lambda_2
    const Spectrum spec = Spectrum::discrete(lam);
    std::vector<JetMap> steps;
    for (int n = 0; n < 6; ++n) {
        JetMap s = JetMap::diagonal(lam, 4);
        s.set(1, MultiIndex({2, 0}), cplx(0.2, 0.1 * n));
        steps.push_back(std::move(s));
    }
    const std::vector<JetMap> tri(6, JetMap::diagonal(lam, 4));
    const auto st = stage_eliminate(steps, tri, spec, 2);
    for (const auto& k : st.shears) REQUIRE(k == JetMap::identity(2, 4));
    REQUIRE_FALSE(st.resonant_update_empty);
    for (int n = 0; n < 6; ++n) {
        REQUIRE(coefficient_norm(st.next_steps[n] - steps[n]) <= 1e-14);
        REQUIRE(st.triangular_steps[n].coeff(1, MultiIndex({2, 0})) ==
                steps[n].coeff(1, MultiIndex({2, 0})));
    }
    REQUIRE(st.max_residual <= 1e-14);
}

TEST_CASE("stage elimination removes a non-resonant quadratic part", "[normalize]") {
    std::mt19937_64 rng(103);
    const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 6, 0.4, 0.8, 2e-2);
    DiscreteFamily fam = testutil::random_family(rng, spec, 6, 12, 0.1);
    const std::vector<JetMap> tri(12, JetMap::diagonal(spec.lambdas(), 6));
    const auto st = stage_eliminate(fam.steps(), tri, spec, 2);
    REQUIRE(st.resonant_update_empty);
    for (const auto& next : st.next_steps) REQUIRE(coefficient_norm(next, 2) <= 1e-12);
    // degree discipline certificate
    REQUIRE(st.max_residual <= 1e-9);
}

TEST_CASE("normalization of a linear family is trivial", "[normalize]") {
    const std::vector<cplx> lam{cplx(0.6), cplx(0.3)};
    const Spectrum spec = Spectrum::discrete(lam);
    DiscreteFamily fam(spec, std::vector<JetMap>(8, JetMap::diagonal(lam, 4)), 4);
    const auto res = normalize_family(fam);
    for (const auto& k : res.cumulative) REQUIRE(k == JetMap::identity(2, 4));
    for (const auto& t : res.triangular_steps) REQUIRE(t.actual_degree() == 1);
    for (double r : res.residual_norms) REQUIRE(r <= 1e-14);
}

TEST_CASE("normalization: no real resonances gives a linear triangular part", "[normalize]") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 4; ++trial) {
        const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 6, 0.45, 0.8, 2e-2);
        DiscreteFamily fam = testutil::random_family(rng, spec, 6, 24, 0.1);
        const auto res = normalize_family(fam);
        REQUIRE(res.resonances.empty());
        for (const auto& t : res.triangular_steps) REQUIRE(t.actual_degree() == 1);
        for (double r : res.residual_norms) REQUIRE(r <= 1e-9);

        // stage conjugation identity for the cumulative conjugators of every
        // stage: k^i_{n+1} o phi_{n,n+1} = phi^i_{n,n+1} o k^i_n
        std::vector<JetMap> cum(fam.horizon() + 1, JetMap::identity(2, 6));
        std::vector<JetMap> phi = fam.steps();
        for (const auto& stage : res.stages) {
            const auto st = stage_eliminate(phi, std::vector<JetMap>(fam.horizon(),
                                            JetMap::diagonal(spec.lambdas(), 6)),
                                            spec, stage.degree_i);
            for (int n = 0; n <= fam.horizon(); ++n) cum[n] = compose(stage.shears[n], cum[n]);
            phi = st.next_steps;
            for (int n = 0; n < fam.horizon(); ++n) {
                const JetMap lhs = compose(cum[n + 1], fam.step(n));
                const JetMap rhs = compose(phi[n], cum[n]);
                REQUIRE(coefficient_norm(lhs - rhs) <= 1e-9);
            }
        }
        // after the last stage the family is linear at jet level
        for (const auto& p : res.final_steps)
            REQUIRE(coefficient_norm_from_degree(p, 2) <= 1e-9);
    }
}

TEST_CASE("triangular part degrees stay below the stage index", "[normalize]") {
    // resonant spectrum: lambda_2 = lambda_1^2 in modulus, plus a degree-3
    // resonance lambda_3 = lambda_1 lambda_2 in a 3d example
    const std::vector<cplx> lam{cplx(0.7), std::polar(0.49, 0.5), std::polar(0.343, 1.1)};
    const Spectrum spec = Spectrum::discrete(lam);
    std::mt19937_64 rng(109);
    std::vector<JetMap> steps;
    for (int n = 0; n < 8; ++n)
        steps.push_back(testutil::random_jet(rng, testutil::diagonal_matrix(lam), 5, 0.1));
    DiscreteFamily fam(spec, steps, 5);
    const auto res = normalize_family(fam);
    REQUIRE(res.q >= 2);
    int stage_at = 2;
    for (const auto& st : res.stages) {
        REQUIRE(st.degree_i == stage_at);
        ++stage_at;
        if (st.degree_i >= res.q) REQUIRE(st.resonant_update_empty);
    }
    for (const auto& t : res.triangular_steps) {
        REQUIRE(t.actual_degree() <= res.q - 1);
        // triangular structure: re-validated by constructing the family
    }
    TriangularFamily check(spec, res.triangular_steps, 5);
    REQUIRE(check.coefficient_bound() >= 0.0);
}

TEST_CASE("periodic backward-regime family: conjugators equal the linearizer", "[normalize]") {
    // |lambda_1|^2 < |lambda_N| puts every pair on the backward branch, so
    // the autonomous stage solutions are constant in n
    const std::vector<cplx> lam{cplx(0.5, 0.05), cplx(0.46)};
    const Spectrum spec = Spectrum::discrete(lam);
    std::mt19937_64 rng(113);
    JetMap germ = testutil::random_jet(rng, testutil::diagonal_matrix(spec.lambdas()), 5, 0.15);
    const int H = 96;
    DiscreteFamily fam(spec, std::vector<JetMap>(H, germ), 5);
    const auto res = normalize_family(fam);
    const JetMap h = autonomous_linearize(germ, spec);
    for (int n = 0; n <= H / 4; ++n)
        REQUIRE(coefficient_norm(res.cumulative[n] - h) <= 1e-9);
    for (const auto& t : res.triangular_steps) REQUIRE(t.actual_degree() == 1);
}

TEST_CASE("autonomous linearizer: pinned cases and refusal", "[normalize]") {
    const std::vector<cplx> lam{cplx(0.7, 0.1), cplx(0.4)};
    const Spectrum spec = Spectrum::discrete(lam);
    REQUIRE(autonomous_linearize(JetMap::diagonal(spec.lambdas(), 4), spec) ==
            JetMap::identity(2, 4));

    JetMap germ = JetMap::diagonal(spec.lambdas(), 3);
    const cplx a(0.25, -0.4);
    germ.set(1, MultiIndex({2, 0}), a);
    const JetMap h = autonomous_linearize(germ, spec);
    const cplx l1 = spec.lambda(0), l2 = spec.lambda(1);
    REQUIRE(std::abs(h.coeff(1, MultiIndex({2, 0})) - a / (l2 - l1 * l1)) <= 1e-14);
    // functional equation h o phi = A o h up to the jet degree
    const JetMap lhs = compose(h, germ);
    const JetMap rhs = compose(JetMap::diagonal(spec.lambdas(), 3), h);
    REQUIRE(coefficient_norm(lhs - rhs) <= 1e-12);

    // complex resonance lambda_2 = lambda_1^2 refuses, naming the pair
    const cplx rl1(0.6, 0.2);
    const Spectrum res = Spectrum::discrete({rl1, rl1 * rl1});
    JetMap bad = JetMap::diagonal(res.lambdas(), 3);
    bad.set(1, MultiIndex({2, 0}), cplx(0.1));
    try {
        autonomous_linearize(bad, res);
        FAIL("expected complex_resonance_error");
    } catch (const complex_resonance_error& e) {
        REQUIRE(e.target() == 1);
        REQUIRE(e.index() == std::vector<int>{2, 0});
    }
}

TEST_CASE("random functional-equation check for the linearizer", "[normalize]") {
    std::mt19937_64 rng(127);
    for (int trial = 0; trial < 6; ++trial) {
        const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 6, 0.4, 0.8, 2e-2);
        // complex defects can still be small when moduli differ; the draw
        // above guarantees a modulus gap, which bounds the divisor too
        JetMap germ =
            testutil::random_jet(rng, testutil::diagonal_matrix(spec.lambdas()), 6, 0.15);
        const JetMap h = autonomous_linearize(germ, spec);
        const JetMap lhs = compose(h, germ);
        const JetMap rhs = compose(JetMap::diagonal(spec.lambdas(), 6), h);
        REQUIRE(coefficient_norm(lhs - rhs) <= 1e-10);
    }
}
