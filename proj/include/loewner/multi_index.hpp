#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner {

// Exponent tuple I = (i_1,...,i_N) of a monomial z^I.  Ordering is graded
// lexicographic: first by |I|, then lexicographically on the entries.  This
// is the one total order used everywhere (coefficient tables, shear
// composition order, serialization).
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> entries) : e_(std::move(entries)) {
        if (e_.empty()) throw contract_violation("MultiIndex: dimension must be >= 1");
        for (int v : e_)
            if (v < 0) throw contract_violation("MultiIndex: entries must be >= 0");
    }

    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }

    static MultiIndex unit(int dim, int k) {
        std::vector<int> e(dim, 0);
        e.at(k) = 1;
        return MultiIndex(std::move(e));
    }

    int dim() const { return static_cast<int>(e_.size()); }
    int order() const { return std::accumulate(e_.begin(), e_.end(), 0); }
    int operator[](int k) const { return e_[k]; }
    const std::vector<int>& entries() const { return e_; }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e_ == b.e_; }

    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        const int oa = a.order(), ob = b.order();
        if (oa != ob) return oa < ob;
        return a.e_ < b.e_;
    }

    std::string to_string() const {
        std::string s = "(";
        for (size_t k = 0; k < e_.size(); ++k) {
            if (k) s += ",";
            s += std::to_string(e_[k]);
        }
        return s + ")";
    }

private:
    std::vector<int> e_;
};

// All multi-indices of the given dimension with |I| == degree, in graded-lex
// order (which at fixed degree is plain lexicographic).
inline std::vector<MultiIndex> multi_indices_of_degree(int dim, int degree) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(dim, 0);
    // lexicographically smallest first: weight pushed to the last slot
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim - 1) {
            cur[pos] = remaining;
            out.emplace_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    if (dim >= 1 && degree >= 0) rec(rec, 0, degree);
    return out;
}

// Multi-indices with lo <= |I| <= hi, graded-lex order.
inline std::vector<MultiIndex> multi_indices_in_range(int dim, int lo, int hi) {
    std::vector<MultiIndex> out;
    for (int d = lo; d <= hi; ++d) {
        auto layer = multi_indices_of_degree(dim, d);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

// Number of multi-indices with |I| <= degree in `dim` variables, i.e.
// binom(degree + dim, dim).
inline long long count_multi_indices_up_to(int dim, int degree) {
    long long r = 1;
    for (int k = 1; k <= dim; ++k) r = r * (degree + k) / k;
    return r;
}

} // namespace loewner
