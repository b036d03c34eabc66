#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace projgeo {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed expression or spec file. `offset` is the byte position in the input.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation outside the real domain of an expression: division by zero,
// ln of a nonpositive value, even root of a negative value, unbound parameter.
class DomainError : public Error {
public:
    using Error::Error;
};

// Metric determinant vanishes (or nearly so) somewhere on the sampling domain.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

// A numeric precondition (Killing property, conserved integral, projective
// equivalence) failed its check.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A rank decision could not be made with the required singular-value gap.
class IndeterminateRankError : public Error {
public:
    using Error::Error;
};

}  // namespace projgeo
