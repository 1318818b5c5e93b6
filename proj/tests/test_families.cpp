#include <catch2/catch_amalgamated.hpp>

#include <future>

#include "loewner/families.hpp"
#include "test_util.hpp"

using namespace loewner;
using testutil::random_in_disk;

namespace {

// the quadratic-shear family (l1 z1, l2 z2 + a_n z1^2)
DiscreteFamily shear_family(const cplx& l1, const cplx& l2, const std::vector<cplx>& a,
                            int degree) {
    std::vector<JetMap> steps;
    for (const auto& an : a) {
        JetMap s = JetMap::diagonal({l1, l2}, degree);
        if (an != cplx(0.0)) s.set(1, MultiIndex({2, 0}), an);
        steps.push_back(std::move(s));
    }
    return DiscreteFamily(Spectrum::discrete({l1, l2}), std::move(steps), degree);
}

JetMap random_triangular_step(std::mt19937_64& rng, const std::vector<cplx>& lam, int degree,
                              const std::vector<int>& comp_degree, double amp) {
    const int n = static_cast<int>(lam.size());
    JetMap s = JetMap::diagonal(lam, degree);
    for (int j = 1; j < n; ++j) {
        for (const auto& idx : multi_indices_in_range(n, 2, comp_degree[j])) {
            bool tail = false;
            for (int m = j; m < n; ++m)
                if (idx[m] != 0) tail = true;
            if (tail) continue;
            s.add_to(j, idx, random_in_disk(rng, amp));
        }
    }
    return s;
}

} // namespace

TEST_CASE("two_index_map: identity, closed form and linear powers", "[families]") {
    std::mt19937_64 rng(53);
    const cplx l1(0.7, 0.1), l2(0.4, -0.2);
    std::vector<cplx> a;
    for (int n = 0; n < 12; ++n) a.push_back(random_in_disk(rng, 0.4));
    DiscreteFamily fam = shear_family(l1, l2, a, 4);

    REQUIRE(fam.two_index_map(3, 3) == JetMap::identity(2, 4));

    // closed form: phi_{n,m} = (l1^{m-n} z1, l2^{m-n} z2 + sum_p l2^{m-1-p} a_p l1^{2(p-n)} z1^2)
    for (auto [n, m] : std::vector<std::pair<int, int>>{{0, 1}, {0, 5}, {2, 9}, {4, 12}}) {
        const JetMap got = fam.two_index_map(n, m);
        cplx lp1 = 1.0, lp2 = 1.0;
        for (int k = 0; k < m - n; ++k) lp1 *= l1, lp2 *= l2;
        cplx quad = 0.0;
        for (int p = n; p < m; ++p) {
            cplx term = a[p];
            for (int k = 0; k < m - 1 - p; ++k) term *= l2;
            for (int k = 0; k < 2 * (p - n); ++k) term *= l1;
            quad += term;
        }
        REQUIRE(std::abs(got.coeff(0, MultiIndex({1, 0})) - lp1) <= 1e-13);
        REQUIRE(std::abs(got.coeff(1, MultiIndex({0, 1})) - lp2) <= 1e-13);
        REQUIRE(std::abs(got.coeff(1, MultiIndex({2, 0})) - quad) <= 1e-12);
    }

    // purely linear family: phi_{n,m} = A^{m-n} z
    DiscreteFamily lin = shear_family(l1, l2, std::vector<cplx>(8, 0.0), 3);
    const JetMap p5 = lin.two_index_map(1, 6);
    cplx l1p = 1.0;
    for (int k = 0; k < 5; ++k) l1p *= l1;
    REQUIRE(std::abs(p5.coeff(0, MultiIndex({1, 0})) - l1p) <= 1e-14);
    REQUIRE(coefficient_norm_from_degree(p5, 2) == 0.0);

    REQUIRE_THROWS_AS(fam.two_index_map(5, 2), contract_violation);
    REQUIRE_THROWS_AS(fam.two_index_map(0, 42), contract_violation);
}

TEST_CASE("semigroup law over sampled triples", "[families]") {
    std::mt19937_64 rng(59);
    const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 5, 0.35, 0.8, 1e-3);
    DiscreteFamily fam = testutil::random_family(rng, spec, 5, 16, 0.3);
    for (auto [n, l, m] : std::vector<std::tuple<int, int, int>>{
             {0, 4, 9}, {1, 2, 3}, {0, 8, 16}, {5, 10, 14}, {3, 3, 12}}) {
        const JetMap left = compose(fam.two_index_map(l, m), fam.two_index_map(n, l));
        const JetMap direct = fam.two_index_map(n, m);
        REQUIRE(coefficient_norm(left - direct) <= 1e-10);
    }
}

TEST_CASE("step linear parts must equal diag(lambda) exactly", "[families]") {
    const Spectrum spec = Spectrum::discrete({cplx(0.5), cplx(0.4)});
    JetMap bad = JetMap::diagonal({cplx(0.5 + 1e-13), cplx(0.4)}, 3);
    REQUIRE_THROWS_AS(DiscreteFamily(spec, {bad}, 3), contract_violation);
}

TEST_CASE("triangular inverse step: pinned forms and exact round trip", "[families]") {
    // diagonal: inverse is diag(1/lambda)
    const std::vector<cplx> lam{cplx(0.6, 0.1), cplx(0.3, -0.2)};
    const JetMap d = JetMap::diagonal(lam, 3);
    const JetMap dinv = TriangularFamily::triangular_inverse_step(d);
    REQUIRE(std::abs(dinv.coeff(0, MultiIndex({1, 0})) - 1.0 / lam[0]) <= 1e-16);
    REQUIRE(std::abs(dinv.coeff(1, MultiIndex({0, 1})) - 1.0 / lam[1]) <= 1e-16);

    // (l1 z1, l2 z2 + t z1^2): inverse (w1/l1, w2/l2 - (t/(l2 l1^2)) w1^2)
    JetMap t = JetMap::diagonal(lam, 2);
    const cplx tc(0.8, -0.3);
    t.set(1, MultiIndex({2, 0}), tc);
    const JetMap tinv = TriangularFamily::triangular_inverse_step(t);
    REQUIRE(std::abs(tinv.coeff(1, MultiIndex({2, 0})) + tc / (lam[1] * lam[0] * lam[0])) <= 1e-14);

    // random triangular automorphisms at N=3: composing with the inverse
    // gives the identity exactly as polynomials
    std::mt19937_64 rng(61);
    const std::vector<cplx> lam3{cplx(0.7), cplx(0.5, 0.1), cplx(0.3, -0.1)};
    for (int trial = 0; trial < 10; ++trial) {
        JetMap step = random_triangular_step(rng, lam3, 12, {1, 2, 4}, 0.5);
        const JetMap inv = TriangularFamily::triangular_inverse_step(step);
        REQUIRE(coefficient_norm(compose(step, inv) - JetMap::identity(3, 12)) <= 1e-13);
        REQUIRE(coefficient_norm(compose(inv, step) - JetMap::identity(3, 12)) <= 1e-13);
    }

    JetMap not_tri = JetMap::diagonal(lam, 3);
    not_tri.set(0, MultiIndex({0, 2}), cplx(1.0));
    REQUIRE_THROWS_AS(TriangularFamily::triangular_inverse_step(not_tri), contract_violation);
}

TEST_CASE("reversed_map agrees with jet inversion of the forward map", "[families]") {
    std::mt19937_64 rng(67);
    const std::vector<cplx> lam{cplx(0.65), cplx(0.4, 0.15)};
    const Spectrum spec = Spectrum::discrete(lam);
    std::vector<JetMap> steps;
    for (int n = 0; n < 10; ++n) steps.push_back(random_triangular_step(rng, lam, 4, {1, 2}, 0.4));
    TriangularFamily tri(spec, steps, 4);

    REQUIRE(tri.reversed_map(4, 4) ==
            JetMap::identity(2, tri.working_degree()));
    for (auto [n, m] : std::vector<std::pair<int, int>>{{0, 3}, {2, 7}, {0, 10}}) {
        const JetMap rev = tri.reversed_map(m, n).truncated(4);
        const JetMap inv = invert(tri.two_index_map(n, m).truncated(4));
        REQUIRE(coefficient_norm(rev - inv) <= 1e-10);
    }

    // linear family: reversed map is diag(lambda)^{-(m-n)}
    std::vector<JetMap> lin_steps(6, JetMap::diagonal(lam, 3));
    TriangularFamily lin(spec, lin_steps, 3);
    const JetMap rev3 = lin.reversed_map(3, 0);
    cplx expect = 1.0 / (lam[1] * lam[1] * lam[1]);
    REQUIRE(std::abs(rev3.coeff(1, MultiIndex({0, 1})) - expect) <= 1e-14);
}

TEST_CASE("degree bound of composed triangular maps", "[families]") {
    std::mt19937_64 rng(71);
    const std::vector<cplx> lam{cplx(0.7), cplx(0.5), cplx(0.35)};
    const Spectrum spec = Spectrum::discrete(lam);

    // all-linear: bound 1
    TriangularFamily lin(spec, std::vector<JetMap>(4, JetMap::diagonal(lam, 2)), 2);
    REQUIRE(lin.degree_bound_composed() == 1);

    // N=2 with quadratic second component: bound 1*2
    const Spectrum spec2 = Spectrum::discrete({cplx(0.7), cplx(0.5)});
    std::vector<JetMap> steps2;
    for (int n = 0; n < 4; ++n)
        steps2.push_back(random_triangular_step(rng, {cplx(0.7), cplx(0.5)}, 2, {1, 2}, 0.4));
    TriangularFamily t2(spec2, steps2, 2);
    REQUIRE(t2.degree_bound_composed() == 2);

    // N=3 with component degrees (1,2,3): bound 6, checked against actual
    // exact compositions T_{0,k} for k <= 10
    std::vector<JetMap> steps3;
    for (int n = 0; n < 10; ++n)
        steps3.push_back(random_triangular_step(rng, lam, 6, {1, 2, 3}, 0.4));
    TriangularFamily t3(spec, steps3, 6);
    REQUIRE(t3.degree_bound_composed() == 6);
    for (int k = 1; k <= 10; ++k)
        REQUIRE(t3.two_index_map(0, k).actual_degree() <= t3.degree_bound_composed());
}

TEST_CASE("growth constants: linear-family values and ratio", "[families]") {
    const std::vector<cplx> lam{cplx(0.5), cplx(0.25)};
    const Spectrum spec = Spectrum::discrete(lam);
    TriangularFamily lin(spec, std::vector<JetMap>(4, JetMap::diagonal(lam, 2)), 2);
    const GrowthConstants g = lin.growth_constants();
    // d = 1, M = N+1, C = 1.05 * max 1/|lambda_j| at the polydisc corners
    REQUIRE(g.d == 1);
    REQUIRE(g.M == 3);
    REQUIRE(g.C == Catch::Approx(1.05 / 0.25).epsilon(1e-12));
    REQUIRE(g.gamma == Catch::Approx(3.0 * g.C).epsilon(1e-12));
    REQUIRE(g.beta == Catch::Approx(2.0 * 2.0 * std::sqrt(2.0) * g.gamma).epsilon(1e-12));
}

TEST_CASE("sampled containment and Lipschitz bounds", "[families]") {
    std::mt19937_64 rng(73);
    const std::vector<cplx> lam{cplx(0.6, 0.1), cplx(0.45)};
    const Spectrum spec = Spectrum::discrete(lam);
    std::vector<JetMap> steps;
    for (int n = 0; n < 8; ++n) steps.push_back(random_triangular_step(rng, lam, 2, {1, 2}, 0.3));
    TriangularFamily tri(spec, steps, 2);
    const GrowthConstants g = tri.growth_constants();

    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto polydisc_point = [&](double radius) {
        std::vector<cplx> z(2);
        for (auto& v : z) v = random_in_disk(rng, radius);
        return z;
    };
    for (int trial = 0; trial < 40; ++trial) {
        const auto z = polydisc_point(1.0);
        for (int k = 1; k <= 8; ++k) {
            const auto v = tri.reversed_map(k, 0).evaluate(z);
            const double bound = std::pow(g.gamma, k);
            for (const auto& c : v) REQUIRE(std::abs(c) <= bound * (1.0 + 1e-12));
        }
    }
    for (int trial = 0; trial < 40; ++trial) {
        const auto z = polydisc_point(0.5);
        const auto w = polydisc_point(0.5);
        double dist = 0.0;
        for (int k = 0; k < 2; ++k) dist += std::norm(z[k] - w[k]);
        dist = std::sqrt(dist);
        for (int k = 1; k <= 8; ++k) {
            const auto vz = tri.reversed_map(k, 0).evaluate(z);
            const auto vw = tri.reversed_map(k, 0).evaluate(w);
            double gap = 0.0;
            for (int c = 0; c < 2; ++c) gap += std::norm(vz[c] - vw[c]);
            gap = std::sqrt(gap);
            REQUIRE(gap <= std::pow(g.beta, k) * dist * (1.0 + 1e-12) + 1e-300);
        }
    }
}

TEST_CASE("attraction to the origin along the forward compositions", "[families]") {
    std::mt19937_64 rng(79);
    const std::vector<cplx> lam{cplx(0.6), cplx(0.4)};
    const Spectrum spec = Spectrum::discrete(lam);
    std::vector<JetMap> steps;
    for (int n = 0; n < 40; ++n) steps.push_back(random_triangular_step(rng, lam, 2, {1, 2}, 0.3));
    TriangularFamily tri(spec, steps, 2);

    std::vector<std::vector<cplx>> samples;
    for (int i = 0; i < 20; ++i)
        samples.push_back({random_in_disk(rng, 1.0), random_in_disk(rng, 1.0)});
    const int n_max = 40;
    const auto rep = tri.attraction_check(samples, n_max, 1e-6);
    REQUIRE(rep.decayed);
    // eventually decreasing; also the first component is exactly lambda_1^k z1
    const auto z0 = samples.front();
    for (int k = 1; k <= 10; ++k) {
        cplx lp = 1.0;
        for (int i = 0; i < k; ++i) lp *= lam[0];
        const auto v = tri.two_index_map(0, k).evaluate(z0);
        REQUIRE(std::abs(v[0] - lp * z0[0]) <= 1e-14);
    }
}

TEST_CASE("contraction radius: pinned example, caps and monotonicity", "[families]") {
    // single map (0.5 z1, 0.5 z2 + z1^2), alpha = 0.75: C = 1, s = 0.25
    DiscreteFamily fam = shear_family(cplx(0.5), cplx(0.5), {cplx(1.0)}, 2);
    const double s = contraction_radius(fam, 0.75);
    REQUIRE(s == Catch::Approx(0.25).epsilon(1e-12));

    // sampled certificate: |phi(z)| <= alpha |z| for |z| <= s
    std::mt19937_64 rng(83);
    const JetMap& step = fam.step(0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<cplx> z{random_in_disk(rng, 1.0), random_in_disk(rng, 1.0)};
        double nz = std::sqrt(std::norm(z[0]) + std::norm(z[1]));
        if (nz == 0.0) continue;
        const double scale = s * std::pow(nz, -1.0) * std::uniform_real_distribution<double>(
                                                          0.01, 1.0)(rng);
        for (auto& v : z) v *= scale;
        nz = std::sqrt(std::norm(z[0]) + std::norm(z[1]));
        const auto w = step.evaluate(z);
        const double nw = std::sqrt(std::norm(w[0]) + std::norm(w[1]));
        REQUIRE(nw <= 0.75 * nz * (1.0 + 1e-12));
    }

    // monotone in alpha
    REQUIRE(contraction_radius(fam, 0.8) >= contraction_radius(fam, 0.7));
    // linear family: the configured domain radius comes back
    DiscreteFamily lin = shear_family(cplx(0.5), cplx(0.5), {cplx(0.0)}, 2);
    REQUIRE(contraction_radius(lin, 0.75) == 1.0);
    REQUIRE_THROWS_AS(contraction_radius(fam, 0.4), contract_violation);
}

TEST_CASE("memoized two-index maps are safe for concurrent readers", "[families]") {
    std::mt19937_64 rng(89);
    const Spectrum spec = testutil::resonance_free_spectrum(rng, 2, 4, 0.4, 0.8, 1e-3);
    DiscreteFamily fam = testutil::random_family(rng, spec, 4, 32, 0.3);
    DiscreteFamily fresh = fam;  // shares steps, fresh queries run concurrently

    std::vector<std::future<JetMap>> futures;
    for (int i = 0; i < 8; ++i)
        futures.push_back(std::async(std::launch::async, [&fresh, i] {
            return fresh.two_index_map(i % 3, 20 + i);
        }));
    for (int i = 0; i < 8; ++i) {
        const JetMap expect = fam.two_index_map(i % 3, 20 + i);
        REQUIRE(coefficient_norm(futures[i].get() - expect) == 0.0);
    }
}
