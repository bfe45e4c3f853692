#pragma once

#include <stdexcept>
#include <string>

namespace netlocal {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes; library code throws, it never calls exit().

// Malformed topology, shape mismatch, inconsistent wiring.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter vector outside the simplex-block constraint set.
struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Family parameters that produce a non-distribution (negative entries).
struct InvalidFamilyPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable or invalid file contents.
struct InputDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside an operation's stated domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bisection endpoints do not bracket the predicate flip.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root selection rule matched no root (or more than one).
struct SelectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite arithmetic encountered where a value was required.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace netlocal
