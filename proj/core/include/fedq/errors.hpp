#pragma once

#include <stdexcept>
#include <string>

namespace fedq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input, shape or dimension mismatch, invalid configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A jet was asked for information beyond its valid order.
class ValidityError : public Error {
public:
    using Error::Error;
};

// Numerical instability in the lattice solvers.
class StabilityError : public Error {
public:
    using Error::Error;
};

// Algebraic precondition failed (e.g. division by hbar, non-closed theta).
class AlgebraError : public Error {
public:
    using Error::Error;
};

} // namespace fedq
