#pragma once

#include <stdexcept>
#include <string>

namespace twohop {

// Raised when a model or configuration parameter is outside its domain.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Raised when an estimate cannot be formed (e.g. no measured sources).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a numerical pipeline runs out of its evaluation budget.
// Carries whatever partial value was reached.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, double partial_value, double achieved_tolerance)
        : std::runtime_error(what), partial_value_(partial_value),
          achieved_tolerance_(achieved_tolerance) {}

    double partial_value() const noexcept { return partial_value_; }
    double achieved_tolerance() const noexcept { return achieved_tolerance_; }

private:
    double partial_value_;
    double achieved_tolerance_;
};

}  // namespace twohop
