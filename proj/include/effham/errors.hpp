#pragma once

#include <stdexcept>
#include <string>

namespace effham {

/// Precondition or invariant violated by the caller.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Input size exceeds what the algorithm can handle at all.
class FeasibilityError : public std::runtime_error {
public:
    explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Computation would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, int attained_width)
        : std::runtime_error(what), width(attained_width) {}

    /// Induced width attained when the budget was exceeded.
    int width;
};

/// Iterative method failed to converge.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}

    double residual;
};

/// An energy denominator E_k - E_n fell below the singularity tolerance.
/// Usually means the subspace is under-sized for the requested level.
class SingularDenominatorError : public std::runtime_error {
public:
    SingularDenominatorError(const std::string& what, int k_index_, std::string outside_bits_,
                             double e_k_, double e_n_)
        : std::runtime_error(what),
          k_index(k_index_),
          outside_bits(std::move(outside_bits_)),
          e_k(e_k_),
          e_n(e_n_) {}

    int k_index;
    std::string outside_bits;  // bit string of the offending outside state
    double e_k;                // unperturbed energy of level k
    double e_n;                // unperturbed energy of the outside state
};

/// Malformed input file.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace effham
