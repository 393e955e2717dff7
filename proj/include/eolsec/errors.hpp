#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eolsec {

/// Invalid model input: a demand profile, variant, window or pattern that
/// violates its invariants.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by state-space construction when the number of regular states
/// would exceed the configured cap. Callers fall back to simulation.
class StateBudgetExceeded : public std::runtime_error {
public:
    StateBudgetExceeded(double states, std::size_t budget)
        : std::runtime_error("state space of ~" + std::to_string(states) +
                             " regular states exceeds budget " + std::to_string(budget)),
          states_(states), budget_(budget) {}

    [[nodiscard]] double states() const noexcept { return states_; }
    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }

private:
    double states_;
    std::size_t budget_;
};

/// Numerical failure while solving for the stationary distribution.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The generator has more than one closed communicating class, so the
/// stationary distribution is not unique.
class NotIrreducible : public NumericalError {
public:
    explicit NotIrreducible(std::size_t closed_classes)
        : NumericalError("generator has " + std::to_string(closed_classes) +
                         " closed classes; stationary distribution is not unique"),
          closed_classes_(closed_classes) {}

    [[nodiscard]] std::size_t closed_classes() const noexcept { return closed_classes_; }

private:
    std::size_t closed_classes_;
};

class NoConvergence : public NumericalError {
public:
    NoConvergence(int iterations, double residual)
        : NumericalError("stationary solve did not reach tolerance after " +
                         std::to_string(iterations) + " refinement steps (residual " +
                         std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// lambda_S / mu_k must be a positive integer for the observable-data formula.
class NonIntegerRpRatio : public InvalidArgument {
public:
    explicit NonIntegerRpRatio(double ratio)
        : InvalidArgument("lambda_S / mu = " + std::to_string(ratio) +
                          " is not a positive integer"),
          ratio_(ratio) {}

    [[nodiscard]] double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

} // namespace eolsec
