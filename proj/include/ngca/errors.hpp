#ifndef NGCA_ERRORS_HPP
#define NGCA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ngca {

// Caller broke a documented precondition (shape mismatch, non-orthonormal
// frame, density queried at an atom, ...).
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Dense storage budget exceeded.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A construction cannot be realized at the requested parameters. `hint`
// carries the diagnostic number the operation documents (minimum feasible n,
// achieved sup|p|, ...).
struct InfeasibleError : std::runtime_error {
    InfeasibleError(const std::string& what, double hint_value)
        : std::runtime_error(what), hint(hint_value) {}
    double hint;
};

struct IllConditionedError : std::runtime_error {
    IllConditionedError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition(condition_estimate) {}
    double condition;
};

// Query or sample budget exhausted.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ngca

#endif  // NGCA_ERRORS_HPP
