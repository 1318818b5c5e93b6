#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "loewner/chains.hpp"
#include "loewner/families.hpp"

namespace loewner {

struct SchedulePiece {
    double t_start = 0.0;
    double t_end = 0.0;
    JetMap perturbation;  // no linear part; added to Lambda z on [t_start, t_end)
};

// Dilation Herglotz field H(z,t) = Lambda z + Q(z,t) with a
// piecewise-constant-in-time jet perturbation schedule on a partition of
// [0, T].  Dissipativity Re<H(z,t), z> <= 0 is a sampled check with margin
// 1e-12; a failing sample rejects the field at construction.
class HerglotzSpec {
public:
    HerglotzSpec(Spectrum spec, int degree, double horizon_time,
                 std::vector<SchedulePiece> schedule = {}, bool check_dissipativity = true)
        : spec_(std::move(spec)), degree_(degree), T_(horizon_time),
          schedule_(std::move(schedule)) {
        if (spec_.mode() != SpectrumMode::continuous)
            throw contract_violation("HerglotzSpec: spectrum must be in continuous mode");
        if (!(T_ > 0.0)) throw contract_violation("HerglotzSpec: horizon time must be > 0");
        double cursor = 0.0;
        for (const auto& p : schedule_) {
            if (p.perturbation.dim() != spec_.dim() || p.perturbation.degree() != degree_)
                throw contract_violation("HerglotzSpec: perturbation shape mismatch");
            if (coefficient_norm(p.perturbation, 1) != 0.0)
                throw contract_violation("HerglotzSpec: perturbation must have no linear part");
            if (p.t_start != cursor || !(p.t_end > p.t_start))
                throw contract_violation("HerglotzSpec: schedule must partition [0, T]");
            cursor = p.t_end;
        }
        if (!schedule_.empty() && cursor != T_)
            throw contract_violation("HerglotzSpec: schedule must end at the horizon time");
        fields_.reserve(schedule_.size());
        for (const auto& p : schedule_) {
            JetMap f = JetMap(spec_.dim(), degree_);
            for (int j = 0; j < spec_.dim(); ++j)
                f.set(j, MultiIndex::unit(spec_.dim(), j), spec_.alpha(j));
            f += p.perturbation;
            fields_.push_back(std::move(f));
        }
        if (fields_.empty()) {
            JetMap f = JetMap(spec_.dim(), degree_);
            for (int j = 0; j < spec_.dim(); ++j)
                f.set(j, MultiIndex::unit(spec_.dim(), j), spec_.alpha(j));
            fields_.push_back(std::move(f));
        }
        if (check_dissipativity) {
            const auto bad = dissipativity_violation();
            if (bad.second > 1e-12)
                throw contract_violation("HerglotzSpec: dissipativity sample failed at t = " +
                                         std::to_string(bad.first) +
                                         " with Re<H,z> = " + std::to_string(bad.second));
        }
    }

    const Spectrum& spectrum() const { return spec_; }
    int dim() const { return spec_.dim(); }
    int degree() const { return degree_; }
    double horizon_time() const { return T_; }
    const std::vector<SchedulePiece>& schedule() const { return schedule_; }

    // jet of z |-> H(z, t)
    const JetMap& jet_at(double t) const {
        if (schedule_.empty()) return fields_.front();
        for (size_t k = 0; k < schedule_.size(); ++k)
            if (t < schedule_[k].t_end || k + 1 == schedule_.size()) return fields_[k];
        return fields_.back();
    }

    double piece_end_after(double t) const {
        if (schedule_.empty()) return T_;
        for (const auto& p : schedule_)
            if (t < p.t_end) return p.t_end;
        return T_;
    }

    std::vector<cplx> evaluate(std::span<const cplx> z, double t) const {
        return jet_at(t).evaluate(z);
    }

    // Worst sampled Re<H(z,t), z>; the pair (t, value) of the worst sample.
    std::pair<double, double> dissipativity_violation() const {
        std::mt19937_64 rng(0x9E3779B9ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> times{0.0};
        for (const auto& p : schedule_) {
            times.push_back(0.5 * (p.t_start + p.t_end));
            times.push_back(std::min(T_, p.t_end));
        }
        if (schedule_.empty()) times.push_back(0.5 * T_);
        std::pair<double, double> worst{0.0, -1e300};
        for (double radius : {0.25, 0.5, 0.75, 0.95}) {
            for (int dir = 0; dir < 32; ++dir) {
                std::vector<cplx> z(dim());
                double norm2 = 0.0;
                for (auto& v : z) {
                    v = cplx(gauss(rng), gauss(rng));
                    norm2 += std::norm(v);
                }
                const double scale = radius / std::sqrt(norm2);
                for (auto& v : z) v *= scale;
                for (double t : times) {
                    const auto h = evaluate(z, t);
                    double re = 0.0;
                    for (int k = 0; k < dim(); ++k) re += (h[k] * std::conj(z[k])).real();
                    if (re > worst.second) worst = {t, re};
                }
            }
        }
        return worst;
    }

private:
    Spectrum spec_;
    int degree_;
    double T_;
    std::vector<SchedulePiece> schedule_;
    std::vector<JetMap> fields_;
};

struct IntegratorOptions {
    double step = 1e-3;
};

// Jet of the evolution operator phi_{s,t} of dz/dtau = H(z,tau): classical
// RK4 on the coefficient ODE d(phi)/dtau = H_jet(tau) o phi, split at
// schedule breakpoints.  The linear block is diagonal and decoupled, so it
// is replaced by the closed form e^{Lambda(tau-s)} after every step.
inline JetMap integrate_evolution(const HerglotzSpec& field, double s, double t,
                                  const IntegratorOptions& opt = {}) {
    if (!(opt.step > 0.0)) throw contract_violation("integrate_evolution: step must be > 0");
    if (s < 0.0 || t < s || t > field.horizon_time() + 1e-12)
        throw contract_violation("integrate_evolution: need 0 <= s <= t <= T");
    const int n = field.dim(), D = field.degree();
    JetMap phi = JetMap::identity(n, D);
    const auto snap_linear = [&](double elapsed) {
        Mat lin(n, std::vector<cplx>(n, 0.0));
        for (int j = 0; j < n; ++j) lin[j][j] = std::exp(field.spectrum().alpha(j) * elapsed);
        phi.set_linear_part(lin);
    };
    double tau = s;
    while (tau < t - 1e-15) {
        const double seg_end = std::min(t, field.piece_end_after(tau));
        const JetMap& f = field.jet_at(tau);
        const double len = seg_end - tau;
        const int nsteps = std::max(1, static_cast<int>(std::ceil(len / opt.step - 1e-12)));
        const double h = len / nsteps;
        for (int i = 0; i < nsteps; ++i) {
            const JetMap k1 = compose(f, phi);
            const JetMap k2 = compose(f, phi + cplx(h / 2) * k1);
            const JetMap k3 = compose(f, phi + cplx(h / 2) * k2);
            const JetMap k4 = compose(f, phi + cplx(h) * k3);
            phi += cplx(h / 6) * (k1 + cplx(2) * k2 + cplx(2) * k3 + k4);
            const double now = (i + 1 == nsteps) ? seg_end : tau + (i + 1) * h;
            snap_linear(now - s);
        }
        tau = seg_end;
    }
    return phi;
}

// Unit-time sampling of the field: steps phi_{n,n+1}, spectrum switched to
// discrete mode (lambda = e^alpha, same order).
inline DiscreteFamily discretize(const HerglotzSpec& field, const IntegratorOptions& opt = {}) {
    if (field.horizon_time() < 1.0)
        throw contract_violation("discretize: horizon time must be >= 1");
    const int n_steps = static_cast<int>(std::floor(field.horizon_time() + 1e-12));
    std::vector<JetMap> steps;
    steps.reserve(n_steps);
    for (int k = 0; k < n_steps; ++k)
        steps.push_back(integrate_evolution(field, k, k + 1, opt));
    std::vector<cplx> lambdas(field.dim());
    for (int j = 0; j < field.dim(); ++j) lambdas[j] = std::exp(field.spectrum().alpha(j));
    return DiscreteFamily(Spectrum::discrete(lambdas), std::move(steps), field.degree());
}

// Chain sampled at real times, raw jets f_s with linear part e^{-Lambda s}.
struct ContinuousChain {
    std::vector<double> times;
    std::vector<JetMap> entries;
    int degree = 0;
    // weighted nonlinear coefficient norm of e^{Lambda s} f_s per sample
    std::vector<double> weights;
    // max weighted j-vs-j+1 ambiguity across samples (well-definedness probe)
    double j_independence_delta = 0.0;
    // normality transfer data: continuous weights vs the discrete bound
    double transfer_factor = 1.0;
    double max_discrete_weight = 0.0;
    bool normality_transfer_ok = true;
};

// f_s = f_j o phi_{s,j} with j = ceil(s).  Integer times reuse the exact
// discrete entry (phi_{s,s} is the identity jet and composition with the
// identity is coefficient-exact).
inline ContinuousChain extend_to_real_times(const ChainJets& discrete_chain,
                                            const HerglotzSpec& field,
                                            const std::vector<double>& times,
                                            const IntegratorOptions& opt = {}) {
    ContinuousChain out;
    out.degree = discrete_chain.degree();
    const Spectrum& spec = field.spectrum();
    const int n = spec.dim();
    double max_cont_weight = 0.0;
    for (double s : times) {
        const int j = static_cast<int>(std::ceil(s - 1e-12));
        if (s < 0.0 || j > discrete_chain.horizon())
            throw contract_violation("extend_to_real_times: time outside chain horizon");
        JetMap entry = compose(discrete_chain.entry(j), integrate_evolution(field, s, j, opt));
        const bool integer_time = (s == static_cast<double>(j));
        if (!integer_time) {
            Mat lin(n, std::vector<cplx>(n, 0.0));
            for (int k = 0; k < n; ++k) lin[k][k] = std::exp(-spec.alpha(k) * s);
            entry.set_linear_part(lin);
        }
        std::vector<cplx> es(n);
        for (int k = 0; k < n; ++k) es[k] = std::exp(spec.alpha(k) * s);
        const JetMap weighted = scale_components(es, entry);
        out.weights.push_back(coefficient_norm_from_degree(weighted, 2));
        max_cont_weight = std::max(max_cont_weight, out.weights.back());
        if (j + 1 <= discrete_chain.horizon()) {
            const JetMap alt =
                compose(discrete_chain.entry(j + 1), integrate_evolution(field, s, j + 1, opt));
            out.j_independence_delta = std::max(
                out.j_independence_delta,
                coefficient_norm(scale_components(es, entry - alt)));
        }
        out.times.push_back(s);
        out.entries.push_back(std::move(entry));
    }
    // Lemma-type normality transfer: continuous weights stay within the
    // discrete bound scaled by sup_u ||e^{-Lambda u}|| ||e^{Lambda u}||.
    out.transfer_factor = std::exp(spec.alpha(0).real() - spec.alpha(n - 1).real());
    for (int k = 0; k <= discrete_chain.horizon(); ++k)
        out.max_discrete_weight =
            std::max(out.max_discrete_weight,
                     coefficient_norm_from_degree(discrete_chain.weighted_entry(k), 2));
    out.normality_transfer_ok =
        max_cont_weight <= out.transfer_factor * out.max_discrete_weight + 1e-12;
    return out;
}

// Central-difference residual of the Loewner PDE d f_t/dt = -d_z f_t
// H(z,t) at an interior sample time: max over sample points of
// |(f_{s+delta} - f_{s-delta})/(2 delta) + d_z f_s H(z,s)|.
inline double pde_residual(const ContinuousChain& chain, const HerglotzSpec& field, double s,
                           const std::vector<std::vector<cplx>>& dz_samples) {
    int i = -1;
    for (size_t k = 0; k < chain.times.size(); ++k)
        if (std::abs(chain.times[k] - s) <= 1e-12) i = static_cast<int>(k);
    if (i < 1 || i + 1 >= static_cast<int>(chain.times.size()))
        throw contract_violation("pde_residual: s must be an interior sample time");
    const double dl = chain.times[i] - chain.times[i - 1];
    const double dr = chain.times[i + 1] - chain.times[i];
    if (std::abs(dl - dr) > 1e-12 * std::max(dl, dr))
        throw contract_violation("pde_residual: neighbors must be symmetric around s");
    const double delta = dr;
    const JetMap& fm = chain.entries[i - 1];
    const JetMap& fc = chain.entries[i];
    const JetMap& fp = chain.entries[i + 1];
    double worst = 0.0;
    for (const auto& z : dz_samples) {
        const auto vp = fp.evaluate(z);
        const auto vm = fm.evaluate(z);
        const auto hz = field.evaluate(z, s);
        const Mat jac = fc.jacobian(z);
        double acc = 0.0;
        for (int r = 0; r < fc.dim(); ++r) {
            cplx v = (vp[r] - vm[r]) / (2.0 * delta);
            for (int c = 0; c < fc.dim(); ++c) v += jac[r][c] * hz[c];
            acc += std::norm(v);
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

} // namespace loewner
