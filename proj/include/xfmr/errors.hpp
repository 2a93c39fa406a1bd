#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xfmr {

/// Argument outside the mathematical domain of an operation (e.g. a point
/// outside [0,1]^dim, a negative load factor).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Query outside the covered range of a series (time or space).
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed argument: shape mismatch, bad index, invalid configuration.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller-side precondition that is not a plain argument check, such as
/// asking for a boundary value at an interior point.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Relative error against an all-zero reference, or a constant scaler slot.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite value encountered during evaluation. `index` names the batch
/// element that produced it.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (batch index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// No placement satisfies the count and distance constraints.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, int n_min, int independence_bound)
        : std::runtime_error(what), n_min_(n_min), independence_bound_(independence_bound) {}

    int n_min() const noexcept { return n_min_; }
    /// Maximum number of candidates that can be selected without violating
    /// the pairwise distance constraint.
    int independence_bound() const noexcept { return independence_bound_; }

private:
    int n_min_;
    int independence_bound_;
};

/// Instance too large for exhaustive enumeration.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace xfmr
