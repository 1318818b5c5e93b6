#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "loewner/errors.hpp"
#include "loewner/multi_index.hpp"

namespace loewner {

enum class SpectrumMode { continuous, discrete };

// Diagonal multiplier bookkeeping.  Continuous mode stores the generators
// alpha_j (Re alpha_N <= ... <= Re alpha_1 < 0) and derives lambda_j =
// exp(alpha_j); discrete mode stores the multipliers lambda_j
// (0 < |lambda_N| <= ... <= |lambda_1| < 1) and derives alpha_j as the
// principal logarithm.  Inputs are sorted into canonical order; the
// permutation from input slots to sorted slots is kept for reporting.
class Spectrum {
public:
    static Spectrum continuous(std::vector<std::complex<double>> alphas) {
        return Spectrum(SpectrumMode::continuous, std::move(alphas));
    }

    static Spectrum discrete(std::vector<std::complex<double>> lambdas) {
        return Spectrum(SpectrumMode::discrete, std::move(lambdas));
    }

    SpectrumMode mode() const { return mode_; }
    int dim() const { return static_cast<int>(lambdas_.size()); }
    const std::vector<std::complex<double>>& lambdas() const { return lambdas_; }
    const std::vector<std::complex<double>>& alphas() const { return alphas_; }
    std::complex<double> lambda(int j) const { return lambdas_.at(j); }
    std::complex<double> alpha(int j) const { return alphas_.at(j); }

    // sorted_order()[k] = position of sorted slot k in the original input
    const std::vector<int>& sorted_order() const { return perm_; }
    bool was_reordered() const {
        for (size_t k = 0; k < perm_.size(); ++k)
            if (perm_[k] != static_cast<int>(k)) return true;
        return false;
    }

    // lambda^I = prod_k lambda_k^{i_k}
    std::complex<double> lambda_power(const MultiIndex& idx) const {
        if (idx.dim() != dim()) throw contract_violation("lambda_power: dimension mismatch");
        std::complex<double> p = 1.0;
        for (int k = 0; k < dim(); ++k)
            for (int e = 0; e < idx[k]; ++e) p *= lambdas_[k];
        return p;
    }

    double modulus_defect(int j, const MultiIndex& idx) const {
        return std::abs(std::abs(lambda(j)) - std::abs(lambda_power(idx)));
    }

    double complex_defect(int j, const MultiIndex& idx) const {
        return std::abs(lambda(j) - lambda_power(idx));
    }

private:
    Spectrum(SpectrumMode mode, std::vector<std::complex<double>> primary) : mode_(mode) {
        if (primary.empty()) throw contract_violation("Spectrum: need at least one value");
        const int n = static_cast<int>(primary.size());
        perm_.resize(n);
        std::iota(perm_.begin(), perm_.end(), 0);
        if (mode == SpectrumMode::continuous) {
            std::stable_sort(perm_.begin(), perm_.end(), [&](int a, int b) {
                return primary[a].real() > primary[b].real();
            });
            alphas_.resize(n);
            lambdas_.resize(n);
            for (int k = 0; k < n; ++k) {
                alphas_[k] = primary[perm_[k]];
                lambdas_[k] = std::exp(alphas_[k]);
            }
            if (!(alphas_.front().real() < 0.0))
                throw contract_violation("Spectrum: continuous mode requires Re alpha_j < 0");
        } else {
            std::stable_sort(perm_.begin(), perm_.end(), [&](int a, int b) {
                return std::abs(primary[a]) > std::abs(primary[b]);
            });
            alphas_.resize(n);
            lambdas_.resize(n);
            for (int k = 0; k < n; ++k) {
                lambdas_[k] = primary[perm_[k]];
                alphas_[k] = std::log(lambdas_[k]);
            }
            if (!(std::abs(lambdas_.front()) < 1.0))
                throw contract_violation("Spectrum: discrete mode requires |lambda_j| < 1");
            if (!(std::abs(lambdas_.back()) > 0.0))
                throw contract_violation("Spectrum: discrete mode requires |lambda_j| > 0");
        }
    }

    SpectrumMode mode_;
    std::vector<std::complex<double>> alphas_;
    std::vector<std::complex<double>> lambdas_;
    std::vector<int> perm_;
};

enum class ResonanceKind { complex_res, real_pure };

struct ResonanceEntry {
    int target = 0;                            // component j, 0-based in sorted order
    MultiIndex index = MultiIndex::zero(1);    // exponents I, |I| >= 2
    ResonanceKind kind = ResonanceKind::real_pure;
    double defect = 0.0;     // | |lambda_j| - |lambda^I| |
};

struct ResonanceReport {
    std::vector<ResonanceEntry> entries;
    // defects in (tol, near_band]: proceed-with-warning candidates
    std::vector<ResonanceEntry> near_entries;
    int max_degree = 0;
    double tolerance = 0.0;

    bool empty() const { return entries.empty(); }
    bool has(int target, const MultiIndex& idx) const {
        for (const auto& e : entries)
            if (e.target == target && e.index == idx) return true;
        return false;
    }
};

inline constexpr double kNearResonanceBand = 1e-3;

// Every (j, I) with 2 <= |I| <= max_degree and | |lambda_j| - |lambda^I| |
// <= tol; classified complex when additionally |lambda_j - lambda^I| <= tol.
// For the discrete ordering a true modulus resonance forces i_m = 0 for all
// m >= j; each returned entry is checked against that structural fact.
inline ResonanceReport enumerate_resonances(const Spectrum& spec, int max_degree, double tol) {
    if (max_degree < 2) throw contract_violation("enumerate_resonances: max_degree must be >= 2");
    if (!(tol > 0.0)) throw contract_violation("enumerate_resonances: tol must be > 0");
    ResonanceReport rep;
    rep.max_degree = max_degree;
    rep.tolerance = tol;
    for (const auto& idx : multi_indices_in_range(spec.dim(), 2, max_degree)) {
        for (int j = 0; j < spec.dim(); ++j) {
            const double defect = spec.modulus_defect(j, idx);
            if (defect <= tol) {
                ResonanceEntry e{j, idx,
                                 spec.complex_defect(j, idx) <= tol ? ResonanceKind::complex_res
                                                                    : ResonanceKind::real_pure,
                                 defect};
                for (int m = j; m < spec.dim(); ++m)
                    if (idx[m] != 0)
                        throw std::logic_error(
                            "enumerate_resonances: entry (" + std::to_string(j + 1) + ", " +
                            idx.to_string() +
                            ") violates the tail-exponent structure; tolerance too coarse");
                rep.entries.push_back(std::move(e));
            } else if (defect <= kNearResonanceBand) {
                rep.near_entries.push_back({j, idx,
                                            spec.complex_defect(j, idx) <= kNearResonanceBand
                                                ? ResonanceKind::complex_res
                                                : ResonanceKind::real_pure,
                                            defect});
            }
        }
    }
    return rep;
}

// Smallest q with |lambda_1|^q < |lambda_N|.  Beyond this degree no
// homogeneous term can be resonant.  Values within tol of |lambda_N| count
// as not yet below, so q stays consistent with the resonance classification
// when |lambda_1|^q equals |lambda_N| up to rounding.
inline int resonance_cutoff_q(const Spectrum& spec, double tol = 1e-9) {
    const double top = std::abs(spec.lambda(0));
    const double bottom = std::abs(spec.lambda(spec.dim() - 1));
    const double target = bottom - std::min(tol, 0.5 * bottom);
    double p = 1.0;
    for (int q = 1; q <= 1000000; ++q) {
        p *= top;
        if (p < target) return q;
    }
    throw std::logic_error("resonance_cutoff_q: no cutoff found (ordering invariant broken?)");
}

// Smallest l with |lambda_1|^l < 1/beta.
inline int koenigs_degree_l(const Spectrum& spec, double beta) {
    if (!(beta >= 1.0)) throw contract_violation("koenigs_degree_l: beta must be >= 1");
    const double top = std::abs(spec.lambda(0));
    const double target = 1.0 / beta;
    double p = 1.0;
    for (int l = 1; l <= 1000000; ++l) {
        p *= top;
        if (p < target) return l;
    }
    throw std::logic_error("koenigs_degree_l: no degree found (|lambda_1| >= 1?)");
}

// C_k = M/r^k + ||A||/r^{k-1}: the remainder constant with |f| <= M on the
// r-ball and linear part A.
inline double taylor_constant(double M, double r, double A_norm, int k) {
    if (!(M > 0.0)) throw contract_violation("taylor_constant: M must be > 0");
    if (!(r > 0.0)) throw contract_violation("taylor_constant: r must be > 0");
    if (k < 2) throw contract_violation("taylor_constant: k must be >= 2");
    return M / std::pow(r, k) + A_norm / std::pow(r, k - 1);
}

} // namespace loewner
