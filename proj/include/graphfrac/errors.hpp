#ifndef GRAPHFRAC_ERRORS_HPP
#define GRAPHFRAC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace graphfrac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed problem files, schema violations.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Evaluation at a pole (Gamma at non-positive integers, secular function at mπ/l_i).
class PoleError : public Error {
public:
    using Error::Error;
};

/// Result exceeds the representable double range.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// An iterative scheme failed to reach its tolerance within its budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Two graph functions (or a function and a basis) live on different graphs.
class GraphMismatch : public Error {
public:
    using Error::Error;
};

/// Any other numerical failure (singular systems, root isolation failures, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace graphfrac

#endif // GRAPHFRAC_ERRORS_HPP
