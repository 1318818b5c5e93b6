#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include "loewner/jet.hpp"
#include "loewner/spectrum.hpp"

namespace loewner {

namespace detail {

// Memoized composition over index ranges with a doubling split.  forward:
// range(n,m) = step_{m-1} o ... o step_n.  reverse: range(n,m) = step_n o
// ... o step_{m-1}.  The cache is shared between copies and guarded for
// concurrent readers.
class RangeComposer {
public:
    RangeComposer() = default;
    RangeComposer(std::vector<JetMap> steps, bool forward)
        : steps_(std::make_shared<const std::vector<JetMap>>(std::move(steps))),
          forward_(forward), cache_(std::make_shared<Cache>()) {}

    int horizon() const { return steps_ ? static_cast<int>(steps_->size()) : 0; }
    const std::vector<JetMap>& steps() const { return *steps_; }

    JetMap range(int n, int m) const {
        if (n < 0 || m < n || m > horizon())
            throw contract_violation("two-index map: need 0 <= n <= m <= horizon");
        if (n == m) {
            const JetMap& any = steps_->front();
            return JetMap::identity(any.dim(), any.degree());
        }
        if (m - n == 1) return (*steps_)[n];
        const auto key = std::make_pair(n, m);
        {
            std::lock_guard<std::mutex> lock(cache_->mutex);
            auto it = cache_->table.find(key);
            if (it != cache_->table.end()) return it->second;
        }
        const int mid = n + (m - n) / 2;
        const JetMap left = range(n, mid);
        const JetMap right = range(mid, m);
        JetMap result = forward_ ? compose(right, left) : compose(left, right);
        {
            std::lock_guard<std::mutex> lock(cache_->mutex);
            cache_->table.emplace(key, result);
        }
        return result;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<std::pair<int, int>, JetMap> table;
    };
    std::shared_ptr<const std::vector<JetMap>> steps_;
    bool forward_ = true;
    std::shared_ptr<Cache> cache_;
};

inline void check_step_shapes(const std::vector<JetMap>& steps, const Spectrum& spec, int degree) {
    if (steps.empty()) throw contract_violation("family: need at least one step");
    for (const auto& s : steps) {
        if (s.dim() != spec.dim()) throw contract_violation("family: step dimension mismatch");
        if (s.degree() != degree) throw contract_violation("family: step degree mismatch");
    }
}

} // namespace detail

// Discrete dilation evolution family: steps phi_{n,n+1} sharing the linear
// part diag(lambda) exactly.  Two-index maps phi_{n,m} come from
// left-composition of the steps, memoized.
class DiscreteFamily {
public:
    DiscreteFamily(Spectrum spec, std::vector<JetMap> steps, int degree)
        : spec_(std::move(spec)), degree_(degree) {
        detail::check_step_shapes(steps, spec_, degree);
        for (const auto& s : steps) {
            for (int j = 0; j < spec_.dim(); ++j)
                for (int k = 0; k < spec_.dim(); ++k) {
                    const cplx expect = (j == k) ? spec_.lambda(j) : cplx(0.0);
                    if (s.coeff(j, MultiIndex::unit(spec_.dim(), k)) != expect)
                        throw contract_violation(
                            "DiscreteFamily: step linear part must equal diag(lambda) exactly");
                }
        }
        composer_ = detail::RangeComposer(std::move(steps), /*forward=*/true);
    }

    const Spectrum& spectrum() const { return spec_; }
    int dim() const { return spec_.dim(); }
    int degree() const { return degree_; }
    int horizon() const { return composer_.horizon(); }
    const JetMap& step(int n) const { return composer_.steps().at(n); }
    const std::vector<JetMap>& steps() const { return composer_.steps(); }

    // phi_{n,m} = phi_{m-1,m} o ... o phi_{n,n+1}
    JetMap two_index_map(int n, int m) const { return composer_.range(n, m); }

    // Largest per-component sum of nonlinear coefficient moduli over the
    // steps: |phi_{n,n+1}(z) - Az| <= bound * |z|^2 on the unit ball.
    double nonlinear_coefficient_bound() const {
        double b = 0.0;
        for (const auto& s : steps()) b = std::max(b, l1_norm(s, 2));
        return b;
    }

private:
    Spectrum spec_;
    int degree_;
    detail::RangeComposer composer_;
};

// Radius s such that every step satisfies |phi_{n,n+1}(z)| <= alpha |z| for
// |z| <= s, from the constructive bound s = (alpha - |lambda_1|) / C with C
// the Taylor remainder constant of the nonlinear part (r = 1, zero linear
// remainder).  Conservative; capped at domain_radius.
inline double contraction_radius(const DiscreteFamily& family, double alpha,
                                 double domain_radius = 1.0) {
    const double a_norm = std::abs(family.spectrum().lambda(0));
    if (!(alpha > a_norm) || !(alpha < 1.0))
        throw contract_violation("contraction_radius: need |lambda_1| < alpha < 1");
    const double m = family.nonlinear_coefficient_bound();
    if (m == 0.0) return domain_radius;  // linear family: no quadratic part
    const double c = taylor_constant(m, 1.0, 0.0, 2);
    return std::min(domain_radius, (alpha - a_norm) / c);
}

struct GrowthConstants {
    double C = 1.0;      // sampled sup of |T_{n+1,n}| on the unit polydisc (x1.05, floored at 1)
    int d = 1;           // degree bound for the reversed chains T_{n,0}
    long long M = 0;     // number of multi-indices with |I| <= d
    double gamma = 1.0;  // M * C^d;  T_{k,0}(polydisc) subset gamma^k polydisc
    double beta = 0.0;   // 2 N sqrt(N) gamma; Lipschitz rate of T_{k,0} on the half polydisc
};

struct AttractionReport {
    std::vector<double> max_modulus_per_n;  // sup over samples of max component modulus
    double threshold = 0.0;
    bool decayed = false;  // final entry below threshold
};

// Triangular evolution family: every step is a triangular automorphism with
// the shared diagonal linear part.  Steps are re-encoded at an internal
// working degree large enough that all composed maps T_{n,m} and all
// reversed maps T_{m,n} are exact polynomials (no truncation loss), which is
// what makes the degree bound and the gamma/beta certificates meaningful.
class TriangularFamily {
public:
    TriangularFamily(Spectrum spec, std::vector<JetMap> steps, int degree)
        : spec_(std::move(spec)), declared_degree_(degree) {
        detail::check_step_shapes(steps, spec_, degree);
        const int n = spec_.dim();
        mu_.assign(n, 1);
        for (const auto& s : steps) {
            validate_triangular(s);
            for (int j = 0; j < n; ++j) {
                int dj = 1;
                for (const auto& [idx, c] : s.component(j)) dj = std::max(dj, idx.order());
                mu_[j] = std::max(mu_[j], dj);
            }
            coeff_bound_ = std::max(coeff_bound_, coefficient_norm(s));
        }
        // component-degree bounds for the per-step inverses, then a working
        // degree covering forward chains, inverse steps and inverse chains
        std::vector<long long> inv_bound(n, 1);
        long long running_max = 1;
        for (int j = 0; j < n; ++j) {
            inv_bound[j] = std::max<long long>(1, static_cast<long long>(mu_[j]) * running_max);
            running_max = std::max(running_max, inv_bound[j]);
        }
        long long forward = 1, backward = 1;
        for (int j = 0; j < n; ++j) {
            forward *= mu_[j];
            backward *= inv_bound[j];
        }
        const long long wd = std::max<long long>(degree, std::max(forward, backward));
        if (wd > 64)
            throw contract_violation("TriangularFamily: working degree bound exceeds 64; "
                                     "composed inverses would not stay exact");
        working_degree_ = static_cast<int>(wd);

        std::vector<JetMap> wide, inv;
        wide.reserve(steps.size());
        inv.reserve(steps.size());
        for (const auto& s : steps) {
            JetMap w(n, working_degree_);
            for (int j = 0; j < n; ++j)
                for (const auto& [idx, c] : s.component(j)) w.set(j, idx, c);
            inv.push_back(triangular_inverse_step(w));
            wide.push_back(std::move(w));
        }
        inv_mu_.assign(n, 1);
        for (const auto& g : inv)
            for (int j = 0; j < n; ++j) {
                int dj = 1;
                for (const auto& [idx, c] : g.component(j)) dj = std::max(dj, idx.order());
                inv_mu_[j] = std::max(inv_mu_[j], dj);
            }
        forward_ = detail::RangeComposer(std::move(wide), /*forward=*/true);
        reverse_ = detail::RangeComposer(std::move(inv), /*forward=*/false);
    }

    // Exact inverse of one triangular step by back-substitution: w_1 maps to
    // z_1 = w_1/lambda_1, then z_j = (w_j - t^(j)(z_1,...,z_{j-1}))/lambda_j.
    static JetMap triangular_inverse_step(const JetMap& t) {
        validate_triangular_static(t);
        const int n = t.dim(), wd = t.degree();
        JetMap inv(n, wd);
        for (int j = 0; j < n; ++j) {
            const cplx lam = t.coeff(j, MultiIndex::unit(n, j));
            JetMap tail(n, wd);  // t^(j) alone, as a map into component j
            for (const auto& [idx, c] : t.component(j))
                if (idx.order() >= 2) tail.set(j, idx, c);
            if (tail.is_zero()) {
                inv.set(j, MultiIndex::unit(n, j), 1.0 / lam);
                continue;
            }
            // substitute the already-built inverse components into t^(j)
            JetMap sub = compose(tail, inv);
            inv.set(j, MultiIndex::unit(n, j), 1.0 / lam);
            for (const auto& [idx, c] : sub.component(j)) inv.add_to(j, idx, -c / lam);
        }
        return inv;
    }

    const Spectrum& spectrum() const { return spec_; }
    int dim() const { return spec_.dim(); }
    int declared_degree() const { return declared_degree_; }
    int working_degree() const { return working_degree_; }
    int horizon() const { return forward_.horizon(); }
    const JetMap& step(int n) const { return forward_.steps().at(n); }
    const JetMap& inverse_step(int n) const { return reverse_.steps().at(n); }
    double coefficient_bound() const { return coeff_bound_; }

    bool is_linear() const {
        for (const auto& s : forward_.steps())
            if (s.actual_degree() > 1) return false;
        return true;
    }

    // T_{n,m}, exact at the working degree.
    JetMap two_index_map(int n, int m) const { return forward_.range(n, m); }

    // T_{m,n} = (T_{n,m})^{-1}, composed from per-step exact inverses in
    // reverse order.
    JetMap reversed_map(int m, int n) const { return reverse_.range(n, m); }

    // mu^(1) * ... * mu^(N) with mu^(j) = max_n deg of component j of
    // T_{n,n+1}; an upper bound for deg T_{n,m}.
    long long degree_bound_composed() const {
        long long p = 1;
        for (int v : mu_) p *= v;
        return p;
    }

    // Same product bound applied to the per-step inverses: bounds deg T_{m,n}.
    long long degree_bound_reversed() const {
        long long p = 1;
        for (int v : inv_mu_) p *= v;
        return p;
    }

    GrowthConstants growth_constants() const {
        GrowthConstants g;
        const int n = dim();
        double sup = 0.0;
        for (const auto& z : polydisc_boundary_samples(n)) {
            for (const auto& inv : reverse_.steps()) {
                for (const auto& v : inv.evaluate(z)) sup = std::max(sup, std::abs(v));
            }
        }
        g.C = std::max(1.0, 1.05 * sup);
        g.d = static_cast<int>(std::max<long long>(1, degree_bound_reversed()));
        g.M = count_multi_indices_up_to(n, g.d);
        g.gamma = static_cast<double>(g.M) * std::pow(g.C, g.d);
        g.beta = 2.0 * n * std::sqrt(static_cast<double>(n)) * g.gamma;
        return g;
    }

    // Evaluates T_{0,n} on the samples; reports max modulus per n and
    // whether the final entry dropped below the threshold.
    AttractionReport attraction_check(const std::vector<std::vector<cplx>>& z_samples, int n_max,
                                      double threshold = 1e-6) const {
        if (n_max < 1 || n_max > horizon())
            throw contract_violation("attraction_check: need 1 <= n_max <= horizon");
        AttractionReport rep;
        rep.threshold = threshold;
        for (int n = 1; n <= n_max; ++n) {
            const JetMap t0n = two_index_map(0, n);
            double m = 0.0;
            for (const auto& z : z_samples)
                for (const auto& v : t0n.evaluate(z)) m = std::max(m, std::abs(v));
            rep.max_modulus_per_n.push_back(m);
        }
        rep.decayed = rep.max_modulus_per_n.back() < threshold;
        return rep;
    }

    // Distinguished-boundary sample grid: 16^N full grid for N <= 3,
    // otherwise 2^N * 64 seeded random boundary points.
    static std::vector<std::vector<cplx>> polydisc_boundary_samples(int n) {
        std::vector<std::vector<cplx>> pts;
        constexpr double two_pi = 6.283185307179586476925286766559;
        if (n <= 3) {
            const int g = 16;
            std::vector<int> digits(n, 0);
            const long long total = static_cast<long long>(std::pow(g, n));
            for (long long t = 0; t < total; ++t) {
                long long v = t;
                std::vector<cplx> z(n);
                for (int k = 0; k < n; ++k) {
                    const int dk = static_cast<int>(v % g);
                    v /= g;
                    z[k] = std::polar(1.0, two_pi * dk / g);
                }
                pts.push_back(std::move(z));
            }
        } else {
            std::mt19937_64 rng(0xB0D51CULL);
            std::uniform_real_distribution<double> angle(0.0, two_pi);
            const long long count = (1LL << n) * 64;
            for (long long t = 0; t < count; ++t) {
                std::vector<cplx> z(n);
                for (int k = 0; k < n; ++k) z[k] = std::polar(1.0, angle(rng));
                pts.push_back(std::move(z));
            }
        }
        return pts;
    }

private:
    void validate_triangular(const JetMap& s) const {
        validate_triangular_static(s);
        for (int j = 0; j < spec_.dim(); ++j) {
            const cplx lam = s.coeff(j, MultiIndex::unit(spec_.dim(), j));
            if (lam != spec_.lambda(j))
                throw contract_violation(
                    "TriangularFamily: diagonal linear part must equal lambda exactly");
        }
    }

    static void validate_triangular_static(const JetMap& s) {
        const int n = s.dim();
        for (int j = 0; j < n; ++j) {
            for (const auto& [idx, c] : s.component(j)) {
                if (idx.order() == 1) {
                    if (idx[j] != 1)
                        throw contract_violation(
                            "triangular map: off-diagonal linear term in component " +
                            std::to_string(j + 1));
                    continue;
                }
                for (int m = j; m < n; ++m)
                    if (idx[m] != 0)
                        throw contract_violation(
                            "triangular map: component " + std::to_string(j + 1) +
                            " depends on variable " + std::to_string(m + 1));
            }
        }
    }

    Spectrum spec_;
    int declared_degree_;
    int working_degree_ = 1;
    std::vector<int> mu_;
    std::vector<int> inv_mu_;
    double coeff_bound_ = 0.0;
    detail::RangeComposer forward_;
    detail::RangeComposer reverse_;
};

// Builds the steps of a periodic family by cycling a pattern up to the
// horizon.
inline std::vector<JetMap> cycle_steps(const std::vector<JetMap>& pattern, int horizon) {
    if (pattern.empty()) throw contract_violation("cycle_steps: empty pattern");
    if (horizon < 1) throw contract_violation("cycle_steps: horizon must be >= 1");
    std::vector<JetMap> out;
    out.reserve(horizon);
    for (int n = 0; n < horizon; ++n) out.push_back(pattern[n % pattern.size()]);
    return out;
}

} // namespace loewner
