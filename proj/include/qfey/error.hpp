#pragma once

#include <stdexcept>
#include <string>

namespace qfey {

// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad grid, grid mismatch, N out of range...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// The computation itself failed: non-finite values, coefficient overflow, lost precision.
class NumericalError : public Error {
public:
    using Error::Error;
};

// An iterative procedure hit its iteration cap before reaching its tolerance.
class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& what, long iterations)
        : NumericalError(what), iterations_(iterations) {}

    long iterations() const noexcept { return iterations_; }

private:
    long iterations_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}

} // namespace detail
} // namespace qfey
