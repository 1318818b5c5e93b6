#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "loewner/families.hpp"
#include "loewner/normalize.hpp"

namespace loewner {

namespace detail {

inline cplx cpow_int(cplx z, long long k) {
    if (k < 0) return cplx(1.0) / cpow_int(z, -k);
    cplx r = 1.0, b = z;
    while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

inline std::vector<cplx> lambda_powers(const Spectrum& spec, long long k) {
    std::vector<cplx> v(spec.dim());
    for (int j = 0; j < spec.dim(); ++j) v[j] = cpow_int(spec.lambda(j), k);
    return v;
}

} // namespace detail

// A discrete chain of jets f_n subordinate to a family: f_n = f_m o
// phi_{n,m} with linear part A^{-n}.  Stored in the weighted frame h_n =
// A^n f_n (linear part exactly the identity, coefficients O(1)); the raw
// entries are materialized on demand.  Coefficient-norm diagnostics all run
// in the weighted frame, where the stated tolerances are meaningful across
// the whole horizon.
class ChainJets {
public:
    ChainJets(Spectrum spec, int degree, std::vector<JetMap> weighted_entries,
              std::string provenance)
        : spec_(std::move(spec)), degree_(degree), weighted_(std::move(weighted_entries)),
          provenance_(std::move(provenance)) {
        if (weighted_.empty()) throw contract_violation("ChainJets: need at least one entry");
        const JetMap id = JetMap::identity(spec_.dim(), degree_);
        for (const auto& h : weighted_) {
            if (h.dim() != spec_.dim() || h.degree() != degree_)
                throw contract_violation("ChainJets: entry shape mismatch");
            if (h.linear_part() != id.linear_part())
                throw contract_violation("ChainJets: weighted entries must be tangent to identity");
        }
    }

    const Spectrum& spectrum() const { return spec_; }
    int degree() const { return degree_; }
    int horizon() const { return static_cast<int>(weighted_.size()) - 1; }
    const std::string& provenance() const { return provenance_; }

    // h_n = A^n f_n
    const JetMap& weighted_entry(int n) const { return weighted_.at(n); }
    const std::vector<JetMap>& weighted_entries() const { return weighted_; }

    // f_n = A^{-n} h_n; linear part exactly diag(lambda)^{-n}
    JetMap entry(int n) const {
        return scale_components(detail::lambda_powers(spec_, -static_cast<long long>(n)),
                                weighted_.at(n));
    }

private:
    Spectrum spec_;
    int degree_;
    std::vector<JetMap> weighted_;
    std::string provenance_;
};

struct ChainOptions {
    double conv_tol = 1e-11;  // successive-iterate delta, two in a row
    int m_max = 200;
};

// Weighted subordination residual max over n < m <= horizon:
// || h_m o phi_{n,m} - A^{m-n} h_n ||, the jet form of f_n = f_m o phi_{n,m}.
inline double subordination_residual(const ChainJets& chain, const DiscreteFamily& family) {
    const int H = std::min(chain.horizon(), family.horizon());
    double worst = 0.0;
    for (int n = 0; n < H; ++n) {
        for (int m = n + 1; m <= H; ++m) {
            const JetMap lhs = compose(chain.weighted_entry(m), family.two_index_map(n, m));
            const JetMap rhs = scale_components(detail::lambda_powers(chain.spectrum(), m - n),
                                                chain.weighted_entry(n));
            worst = std::max(worst, coefficient_norm(lhs - rhs));
        }
    }
    return worst;
}

struct KoenigsResult {
    JetMap intertwiner;            // h_n, tangent to identity
    std::vector<double> deltas;    // successive-iterate coefficient deltas
    int converged_at = 0;          // first index j with the stop rule satisfied
    int agreement_order = 0;       // k: phi - T = O(|z|^k) at jet level
    double beta = 0.0;             // certificate for T (exact 1/|lambda_N| when T is linear)
    bool gap_condition = false;    // |lambda_1|^k beta < 1
    double predicted_rate = 0.0;   // |lambda_1|^k beta
    double empirical_rate = 0.0;   // max delta ratio past burn-in
};

namespace detail {

inline double empirical_ratio(const std::vector<double>& deltas, int burn_in) {
    double r = 0.0;
    for (size_t t = burn_in + 1; t < deltas.size(); ++t)
        if (deltas[t - 1] > 1e-13) r = std::max(r, deltas[t] / deltas[t - 1]);
    return r;
}

} // namespace detail

// Koenigs-type limit h_n = lim_j T_{j,n} o phi_{n,j}.  The gap condition
// |lambda_1|^k < 1/beta at the jet agreement order k is checked and
// reported; the limit itself is taken whenever the iterates settle.
inline KoenigsResult koenigs_intertwiner(const DiscreteFamily& family, const TriangularFamily& tri,
                                         int n, const ChainOptions& opt = {}) {
    if (n < 0 || n > family.horizon())
        throw contract_violation("koenigs_intertwiner: n outside horizon");
    const int D = family.degree();
    const Spectrum& spec = family.spectrum();

    int agree = D + 1;  // identical jets agree past the truncation degree
    const int hz = std::min(family.horizon(), tri.horizon());
    for (int m = 0; m < hz; ++m) {
        const JetMap diff = family.step(m) - tri.step(m).truncated(D);
        for (int d = 2; d <= D; ++d)
            if (coefficient_norm(diff, d) != 0.0) {
                agree = std::min(agree, d);
                break;
            }
    }

    KoenigsResult out{JetMap::identity(spec.dim(), D)};
    out.agreement_order = agree;
    out.beta = tri.is_linear() ? 1.0 / std::abs(spec.lambda(spec.dim() - 1))
                               : tri.growth_constants().beta;
    out.predicted_rate = std::pow(std::abs(spec.lambda(0)), agree) * out.beta;
    out.gap_condition = out.predicted_rate < 1.0;

    const int j_cap = std::min(family.horizon(), n + opt.m_max);
    JetMap prev = JetMap::identity(spec.dim(), D);  // j = n iterate
    bool have_small = false;
    for (int j = n + 1; j <= j_cap; ++j) {
        JetMap cur =
            compose(tri.reversed_map(j, n).truncated(D), family.two_index_map(n, j));
        const double delta = coefficient_norm(cur - prev);
        out.deltas.push_back(delta);
        prev = std::move(cur);
        if (delta <= opt.conv_tol) {
            if (have_small) {
                out.intertwiner = prev;
                out.converged_at = j;
                out.empirical_rate = detail::empirical_ratio(out.deltas, 3);
                return out;
            }
            have_small = true;
        } else {
            have_small = false;
        }
    }
    throw non_convergence_error(out.deltas, "koenigs_intertwiner: no convergence by iterate " +
                                                std::to_string(j_cap));
}

// Chain from the main construction f_n = lim_m T_{m,0} o k_m o phi_{n,m},
// computed in the weighted frame h_n = lim_m (A^n T_{m,0}) o k_m o phi_{n,m}.
// With an empty resonance report T_{m,0} is A^{-m} and this is the plain
// Koenigs chain.
inline ChainJets build_chain(const DiscreteFamily& family, const NormalizationResult& norm,
                             const ChainOptions& opt = {}) {
    const Spectrum& spec = family.spectrum();
    const int D = family.degree();
    const int H = family.horizon();
    if (norm.horizon != H || norm.degree != D)
        throw contract_violation("build_chain: normalization does not match family");
    const TriangularFamily& tri = *norm.triangular;

    std::vector<JetMap> entries;
    entries.reserve(H + 1);
    int last_converged = -1;
    for (int n = 0; n <= H; ++n) {
        const auto weights = detail::lambda_powers(spec, n);
        JetMap prev(spec.dim(), D);
        bool have_prev = false, have_small = false, converged = false;
        std::vector<double> deltas;
        const int m_cap = std::min(H, n + opt.m_max);
        for (int m = n; m <= m_cap; ++m) {
            JetMap cur = compose(
                scale_components(weights, tri.reversed_map(m, 0).truncated(D)),
                compose(norm.cumulative[m], family.two_index_map(n, m)));
            if (have_prev) {
                const double delta = coefficient_norm(cur - prev);
                deltas.push_back(delta);
                if (delta <= opt.conv_tol) {
                    if (have_small) {
                        prev = std::move(cur);
                        converged = true;
                        break;
                    }
                    have_small = true;
                } else {
                    have_small = false;
                }
            }
            prev = std::move(cur);
            have_prev = true;
        }
        if (converged) {
            last_converged = n;
            prev.set_linear_part(detail::mat_identity(spec.dim()));
            entries.push_back(std::move(prev));
            continue;
        }
        // The iterate budget shrinks toward the horizon.  The limit factors
        // through any earlier entry as f_n = f_{n*} o (phi_{n*,n})^{-1}
        // exactly, so the tail continues through the last converged entry.
        if (last_converged < 0)
            throw non_convergence_error(deltas, "build_chain: entry " + std::to_string(n) +
                                                    " did not converge");
        JetMap cont = compose(entries[last_converged],
                              invert(family.two_index_map(last_converged, n)));
        cont = scale_components(detail::lambda_powers(spec, n - last_converged), cont);
        cont.set_linear_part(detail::mat_identity(spec.dim()));
        entries.push_back(std::move(cont));
    }
    return ChainJets(spec, D, std::move(entries), "koenigs-limit");
}

// Jet-level probe of chain extension: f_m o phi_{n,m}, which must equal f_n.
inline JetMap extend_chain_jet(const ChainJets& chain, const DiscreteFamily& family, int n, int m) {
    if (n < 0 || n > m || m > chain.horizon())
        throw contract_violation("extend_chain_jet: need 0 <= n <= m <= horizon");
    return compose(chain.entry(m), family.two_index_map(n, m));
}

// Psi_n = g_n o f_n^{-1}; for two chains of the same family this jet is
// independent of n (the transfer mapping of the essential-uniqueness
// statement).
inline JetMap transfer_map(const ChainJets& chain_f, const ChainJets& chain_g, int n) {
    if (chain_f.spectrum().lambdas() != chain_g.spectrum().lambdas())
        throw contract_violation("transfer_map: chains have different linear parts");
    if (n < 0 || n > std::min(chain_f.horizon(), chain_g.horizon()))
        throw contract_violation("transfer_map: n outside horizon");
    const int D = chain_f.degree();
    const Spectrum& spec = chain_f.spectrum();
    // Psi_n = A^{-n} o (hg_n o hf_n^{-1}) o A^n, in O(1) pieces
    JetMap w = compose(chain_g.weighted_entry(n), invert(chain_f.weighted_entry(n)));
    const JetMap an = JetMap::diagonal(detail::lambda_powers(spec, n), D);
    return scale_components(detail::lambda_powers(spec, -static_cast<long long>(n)),
                            compose(w, an));
}

struct TransferConsistency {
    JetMap transfer;      // Psi_0
    double max_delta = 0.0;
    bool independent_of_n = false;
};

inline TransferConsistency transfer_consistency(const ChainJets& chain_f, const ChainJets& chain_g,
                                                double tol = 1e-9) {
    TransferConsistency out{transfer_map(chain_f, chain_g, 0)};
    const int H = std::min(chain_f.horizon(), chain_g.horizon());
    for (int n = 1; n <= H; ++n)
        out.max_delta = std::max(out.max_delta,
                                 coefficient_norm(transfer_map(chain_f, chain_g, n) - out.transfer));
    out.independent_of_n = out.max_delta <= tol;
    return out;
}

enum class NormalityVerdict { bounded, growing, inconclusive };

struct NormalityDiagnostic {
    std::vector<double> weights;  // w_n = max nonlinear coefficient of A^n f_n
    double slope = 0.0;           // least-squares slope of log running-max(w) over the last half
    double max_weight = 0.0;
    double doubling_ratio = 0.0;  // running max at horizon vs at horizon/2
    NormalityVerdict verdict = NormalityVerdict::bounded;
};

struct NormalityOptions {
    double bound_cap = 1e6;
    double slope_tol = 1e-3;
    double growing_slope = 1e-2;
    double zero_floor = 1e-12;
    double doubling_weight_floor = 1e-6;
    int doubling_min_horizon = 64;  // the doubling escalation needs a long run
};

inline const char* to_string(NormalityVerdict v) {
    switch (v) {
        case NormalityVerdict::bounded: return "bounded";
        case NormalityVerdict::growing: return "growing";
        default: return "inconclusive";
    }
}

// Finite-horizon surrogate for "(A^n f_n) is a normal family": the weighted
// nonlinear coefficient norms must stay capped with flat log-growth.  The
// slope is fitted on the running maximum of the weights, which plateaus for
// bounded (possibly noisy or oscillating) sequences and tracks genuine
// trends.  On long horizons a running-max doubling between horizon/2 and
// horizon classifies as growing even when the log-slope alone sits in the
// inconclusive band (linear-in-n growth has slope ~ 1/n there).
inline NormalityDiagnostic normality_diagnostic(const ChainJets& chain,
                                                const NormalityOptions& opt = {}) {
    const int H = chain.horizon();
    if (H < 8) throw contract_violation("normality_diagnostic: need horizon >= 8");
    NormalityDiagnostic d;
    for (int n = 0; n <= H; ++n) {
        d.weights.push_back(coefficient_norm_from_degree(chain.weighted_entry(n), 2));
        d.max_weight = std::max(d.max_weight, d.weights.back());
    }
    if (d.max_weight <= opt.zero_floor) {
        d.verdict = NormalityVerdict::bounded;
        return d;
    }
    std::vector<double> runmax(H + 1, 0.0);
    double rm = 0.0;
    for (int n = 0; n <= H; ++n) {
        rm = std::max(rm, d.weights[n]);
        runmax[n] = rm;
    }
    d.doubling_ratio = runmax[H] / std::max(runmax[H / 2], 1e-300);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int n = (H + 1) / 2; n <= H; ++n) {
        if (runmax[n] <= 0.0) continue;
        const double x = n, y = std::log(runmax[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * sxx - sx * sx;
        if (denom > 0.0) d.slope = (count * sxy - sx * sy) / denom;
    }

    const bool doubled = H >= opt.doubling_min_horizon && d.doubling_ratio >= 2.0 &&
                         d.max_weight >= opt.doubling_weight_floor;
    if (d.max_weight > opt.bound_cap || d.slope > opt.growing_slope || doubled)
        d.verdict = NormalityVerdict::growing;
    else if (d.slope <= opt.slope_tol)
        d.verdict = NormalityVerdict::bounded;
    else
        d.verdict = NormalityVerdict::inconclusive;
    return d;
}

} // namespace loewner
