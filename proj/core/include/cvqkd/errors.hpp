#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

/// Bad input: out-of-range parameter, invalid mode index, unphysical state
/// handed to an operation that requires a physical one.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Attack or protocol parameters violate the uncertainty principle.
/// The message names the violated constraint.
class UnphysicalParameters : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A matrix that must be positive definite is not, or a radicand went
/// negative beyond roundoff.
class NumericalDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The covariance of the measured outcome variables is singular.
class DegenerateMeasurement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An optimisation was asked to search a region with no physical point.
class EmptyDomain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cvqkd
