#pragma once

#include <stdexcept>
#include <string>

namespace bsec {

// Precondition violations on numeric inputs (thresholds, probabilities, grid sizes).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Table shape does not match the instance (e.g. K x (B+1) thresholds, K != 2).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A policy asked for a paid query without budget, or compared twice in one step.
class IllegalAction : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class QueryWithoutBudget : public IllegalAction {
public:
    using IllegalAction::IllegalAction;
};

// Pairwise model: the first overall query needs K-1 comparisons.
class BudgetInsufficient : public IllegalAction {
public:
    using IllegalAction::IllegalAction;
};

class EmptyPrefix : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SpecMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InstanceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateRegion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bsec
