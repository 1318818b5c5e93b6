#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "loewner/errors.hpp"
#include "loewner/multi_index.hpp"

namespace loewner {

using cplx = std::complex<double>;
using Mat = std::vector<std::vector<cplx>>;

namespace detail {

inline Mat mat_identity(int n) {
    Mat m(n, std::vector<cplx>(n, 0.0));
    for (int i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    const int n = static_cast<int>(a.size());
    Mat r(n, std::vector<cplx>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}

// Gauss-Jordan with partial pivoting; N is tiny here.
inline Mat mat_inverse(const Mat& a) {
    const int n = static_cast<int>(a.size());
    Mat m = a;
    Mat inv = mat_identity(n);
    double scale = 0.0;
    for (const auto& row : a)
        for (const auto& v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-14 * std::max(1.0, scale);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) <= tol)
            throw non_invertible_error("matrix is singular (pivot below tolerance)");
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        const cplx d = m[col][col];
        for (int j = 0; j < n; ++j) {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = m[r][col];
            if (f == cplx(0.0)) continue;
            for (int j = 0; j < n; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

} // namespace detail

// Truncated polynomial map germ of C^N fixing the origin: per component a
// sparse table MultiIndex -> coefficient with 1 <= |I| <= degree.  Absent
// entries are zero; stored zeros are pruned so equality of tables mirrors
// equality of maps.  Immutable in spirit: operations return new values.
class JetMap {
public:
    using Table = std::map<MultiIndex, cplx>;

    JetMap(int dim, int degree) : dim_(dim), degree_(degree), comps_(dim) {
        if (dim < 1) throw contract_violation("JetMap: dim must be >= 1");
        if (degree < 1) throw contract_violation("JetMap: degree must be >= 1");
    }

    static JetMap identity(int dim, int degree) {
        JetMap f(dim, degree);
        for (int j = 0; j < dim; ++j) f.set(j, MultiIndex::unit(dim, j), 1.0);
        return f;
    }

    static JetMap linear(const Mat& a, int degree) {
        const int n = static_cast<int>(a.size());
        JetMap f(n, degree);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) f.set(j, MultiIndex::unit(n, k), a[j][k]);
        return f;
    }

    static JetMap diagonal(const std::vector<cplx>& lambda, int degree) {
        JetMap f(static_cast<int>(lambda.size()), degree);
        for (int j = 0; j < f.dim_; ++j) f.set(j, MultiIndex::unit(f.dim_, j), lambda[j]);
        return f;
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    const Table& component(int j) const { return comps_.at(j); }

    cplx coeff(int j, const MultiIndex& idx) const {
        const auto& t = comps_.at(j);
        auto it = t.find(idx);
        return it == t.end() ? cplx(0.0) : it->second;
    }

    void set(int j, const MultiIndex& idx, cplx value) {
        check_key(j, idx);
        if (value == cplx(0.0))
            comps_[j].erase(idx);
        else
            comps_[j][idx] = value;
    }

    void add_to(int j, const MultiIndex& idx, cplx value) { set(j, idx, coeff(j, idx) + value); }

    Mat linear_part() const {
        Mat a(dim_, std::vector<cplx>(dim_, 0.0));
        for (int j = 0; j < dim_; ++j)
            for (int k = 0; k < dim_; ++k) a[j][k] = coeff(j, MultiIndex::unit(dim_, k));
        return a;
    }

    void set_linear_part(const Mat& a) {
        for (int j = 0; j < dim_; ++j)
            for (int k = 0; k < dim_; ++k) set(j, MultiIndex::unit(dim_, k), a[j][k]);
    }

    // Largest |I| with a stored coefficient; 0 for the zero map.
    int actual_degree() const {
        int d = 0;
        for (const auto& t : comps_)
            for (const auto& [idx, c] : t) d = std::max(d, idx.order());
        return d;
    }

    bool is_zero() const {
        for (const auto& t : comps_)
            if (!t.empty()) return false;
        return true;
    }

    JetMap truncated(int new_degree) const {
        JetMap r(dim_, new_degree);
        for (int j = 0; j < dim_; ++j)
            for (const auto& [idx, c] : comps_[j])
                if (idx.order() <= new_degree) r.set(j, idx, c);
        return r;
    }

    JetMap& operator+=(const JetMap& o) {
        check_same_shape(o, "operator+=");
        for (int j = 0; j < dim_; ++j)
            for (const auto& [idx, c] : o.comps_[j]) add_to(j, idx, c);
        return *this;
    }

    JetMap& operator-=(const JetMap& o) {
        check_same_shape(o, "operator-=");
        for (int j = 0; j < dim_; ++j)
            for (const auto& [idx, c] : o.comps_[j]) add_to(j, idx, -c);
        return *this;
    }

    JetMap& operator*=(cplx s) {
        for (int j = 0; j < dim_; ++j) {
            if (s == cplx(0.0)) {
                comps_[j].clear();
                continue;
            }
            for (auto& [idx, c] : comps_[j]) c *= s;
        }
        return *this;
    }

    friend JetMap operator+(JetMap a, const JetMap& b) { return a += b; }
    friend JetMap operator-(JetMap a, const JetMap& b) { return a -= b; }
    friend JetMap operator*(cplx s, JetMap a) { return a *= s; }

    friend bool operator==(const JetMap& a, const JetMap& b) {
        return a.dim_ == b.dim_ && a.degree_ == b.degree_ && a.comps_ == b.comps_;
    }

    std::vector<cplx> evaluate(std::span<const cplx> z) const {
        if (static_cast<int>(z.size()) != dim_)
            throw contract_violation("evaluate: point dimension mismatch");
        std::vector<cplx> out(dim_, 0.0);
        for (int j = 0; j < dim_; ++j) {
            for (const auto& [idx, c] : comps_[j]) {
                cplx m = c;
                for (int k = 0; k < dim_; ++k)
                    for (int p = 0; p < idx[k]; ++p) m *= z[k];
                out[j] += m;
            }
        }
        return out;
    }

    // Jacobian matrix d_z f evaluated at z (exact polynomial derivative).
    Mat jacobian(std::span<const cplx> z) const {
        if (static_cast<int>(z.size()) != dim_)
            throw contract_violation("jacobian: point dimension mismatch");
        Mat d(dim_, std::vector<cplx>(dim_, 0.0));
        for (int j = 0; j < dim_; ++j) {
            for (const auto& [idx, c] : comps_[j]) {
                for (int k = 0; k < dim_; ++k) {
                    if (idx[k] == 0) continue;
                    cplx m = c * static_cast<double>(idx[k]);
                    for (int l = 0; l < dim_; ++l) {
                        const int e = idx[l] - (l == k ? 1 : 0);
                        for (int p = 0; p < e; ++p) m *= z[l];
                    }
                    d[j][k] += m;
                }
            }
        }
        return d;
    }

private:
    void check_key(int j, const MultiIndex& idx) const {
        if (j < 0 || j >= dim_) throw contract_violation("JetMap: component out of range");
        if (idx.dim() != dim_) throw contract_violation("JetMap: index dimension mismatch");
        const int o = idx.order();
        if (o < 1 || o > degree_)
            throw contract_violation("JetMap: monomial order outside [1, degree]");
    }

    void check_same_shape(const JetMap& o, const char* op) const {
        if (o.dim_ != dim_ || o.degree_ != degree_)
            throw contract_violation(std::string(op) + ": shape mismatch");
    }

    int dim_;
    int degree_;
    std::vector<Table> comps_;
};

namespace detail {

// Scalar polynomial with the same sparse representation, plus a slot for a
// constant term (index of order 0) used only inside products of powers.
using Poly = std::map<MultiIndex, cplx>;

inline Poly poly_one(int dim) {
    Poly p;
    p[MultiIndex::zero(dim)] = 1.0;
    return p;
}

inline Poly poly_mul_trunc(const Poly& a, const Poly& b, int max_degree) {
    Poly r;
    for (const auto& [ia, ca] : a) {
        const int oa = ia.order();
        for (const auto& [ib, cb] : b) {
            if (oa + ib.order() > max_degree) continue;
            std::vector<int> e(ia.entries());
            for (size_t k = 0; k < e.size(); ++k) e[k] += ib[k];
            MultiIndex key{std::move(e)};
            r[key] += ca * cb;
        }
    }
    // prune exact zeros produced by cancellation
    for (auto it = r.begin(); it != r.end();)
        it = (it->second == cplx(0.0)) ? r.erase(it) : std::next(it);
    return r;
}

} // namespace detail

// Jet of outer(inner(z)) truncated at the common degree.  Since inner fixes
// the origin, every coefficient up to the truncation degree is exactly the
// coefficient of the analytic composition.
inline JetMap compose(const JetMap& outer, const JetMap& inner) {
    if (outer.dim() != inner.dim())
        throw contract_violation("compose: dimension mismatch");
    if (outer.degree() != inner.degree())
        throw contract_violation("compose: degree mismatch");
    const int n = outer.dim(), D = outer.degree();

    // cached powers of the inner components, cut at D
    std::vector<std::vector<detail::Poly>> powers(n);
    for (int k = 0; k < n; ++k) {
        powers[k].push_back(detail::poly_one(n));
        detail::Poly base(inner.component(k).begin(), inner.component(k).end());
        for (int e = 1; e <= D; ++e)
            powers[k].push_back(detail::poly_mul_trunc(powers[k][e - 1], base, D));
    }

    JetMap result(n, D);
    for (int j = 0; j < n; ++j) {
        detail::Poly acc;
        for (const auto& [idx, c] : outer.component(j)) {
            detail::Poly term = detail::poly_one(n);
            for (int k = 0; k < n; ++k) {
                if (idx[k] == 0) continue;
                term = detail::poly_mul_trunc(term, powers[k][idx[k]], D);
            }
            for (const auto& [ti, tc] : term) acc[ti] += c * tc;
        }
        for (const auto& [idx, c] : acc)
            if (c != cplx(0.0)) result.set(j, idx, c);
    }
    return result;
}

// Compositional inverse, degree by degree.  Requires an invertible linear
// part; the result g satisfies f(g(z)) = g(f(z)) = z up to the truncation
// degree.
inline JetMap invert(const JetMap& f) {
    const int n = f.dim(), D = f.degree();
    Mat linv;
    try {
        linv = detail::mat_inverse(f.linear_part());
    } catch (const non_invertible_error&) {
        throw non_invertible_error("invert: singular linear part");
    }
    JetMap g = JetMap::linear(linv, D);
    const JetMap id = JetMap::identity(n, D);
    for (int d = 2; d <= D; ++d) {
        JetMap r = compose(f, g) - id;
        // degree-d error; correcting g at degree d only disturbs degrees > d
        bool any = false;
        JetMap corr(n, D);
        for (int j = 0; j < n; ++j) {
            for (const auto& [idx, c] : r.component(j)) {
                if (idx.order() != d) continue;
                any = true;
                for (int i = 0; i < n; ++i)
                    if (linv[i][j] != cplx(0.0)) corr.add_to(i, idx, linv[i][j] * c);
            }
        }
        if (any) g -= corr;
    }
    return g;
}

// The part of f with |I| == i, other coefficients dropped.
inline JetMap homogeneous_part(const JetMap& f, int i) {
    if (i < 1 || i > f.degree())
        throw contract_violation("homogeneous_part: order outside [1, degree]");
    JetMap r(f.dim(), f.degree());
    for (int j = 0; j < f.dim(); ++j)
        for (const auto& [idx, c] : f.component(j))
            if (idx.order() == i) r.set(j, idx, c);
    return r;
}

// Max modulus over stored coefficients, optionally restricted to one
// homogeneous degree.  Zero iff the selected coefficient set is all zero.
inline double coefficient_norm(const JetMap& f, std::optional<int> degree_filter = std::nullopt) {
    double m = 0.0;
    for (int j = 0; j < f.dim(); ++j)
        for (const auto& [idx, c] : f.component(j)) {
            if (degree_filter && idx.order() != *degree_filter) continue;
            m = std::max(m, std::abs(c));
        }
    return m;
}

// Max coefficient modulus over degrees >= min_degree (used by normality
// weights and residual checks on the nonlinear part).
inline double coefficient_norm_from_degree(const JetMap& f, int min_degree) {
    double m = 0.0;
    for (int j = 0; j < f.dim(); ++j)
        for (const auto& [idx, c] : f.component(j))
            if (idx.order() >= min_degree) m = std::max(m, std::abs(c));
    return m;
}

// Largest per-component sum of coefficient moduli; a bound for |f| on the
// closed unit polydisc.  min_degree = 2 bounds the nonlinear remainder.
inline double l1_norm(const JetMap& f, int min_degree = 1) {
    double m = 0.0;
    for (int j = 0; j < f.dim(); ++j) {
        double s = 0.0;
        for (const auto& [idx, c] : f.component(j))
            if (idx.order() >= min_degree) s += std::abs(c);
        m = std::max(m, s);
    }
    return m;
}

// Post-compose with a diagonal matrix: component j scaled by lambda[j].
inline JetMap scale_components(const std::vector<cplx>& lambda, const JetMap& f) {
    if (static_cast<int>(lambda.size()) != f.dim())
        throw contract_violation("scale_components: dimension mismatch");
    JetMap r(f.dim(), f.degree());
    for (int j = 0; j < f.dim(); ++j)
        for (const auto& [idx, c] : f.component(j)) r.set(j, idx, lambda[j] * c);
    return r;
}

} // namespace loewner
