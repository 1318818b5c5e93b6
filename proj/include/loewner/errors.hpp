#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace loewner {

// Precondition / contract failures (dimension mismatch, bad indices, ...).
class contract_violation : public std::invalid_argument {
public:
    explicit contract_violation(const std::string& what) : std::invalid_argument(what) {}
};

class non_invertible_error : public std::runtime_error {
public:
    explicit non_invertible_error(const std::string& what) : std::runtime_error(what) {}
};

// A homological coefficient exceeded the configured cap.  Carries the
// offending target component and monomial exponents.
class small_divisor_error : public std::runtime_error {
public:
    small_divisor_error(int target, std::vector<int> index, double magnitude,
                        const std::string& what)
        : std::runtime_error(what), target_(target), index_(std::move(index)),
          magnitude_(magnitude) {}

    int target() const { return target_; }
    const std::vector<int>& index() const { return index_; }
    double magnitude() const { return magnitude_; }

private:
    int target_;
    std::vector<int> index_;
    double magnitude_;
};

// A limit did not settle within the iteration budget.  Carries the
// successive-iterate deltas seen so far.
class non_convergence_error : public std::runtime_error {
public:
    non_convergence_error(std::vector<double> residual_history, const std::string& what)
        : std::runtime_error(what), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

} // namespace loewner
