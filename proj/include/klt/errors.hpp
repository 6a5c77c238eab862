#pragma once

#include <stdexcept>
#include <string>

namespace klt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Iterative method did not reach its tolerance within the iteration cap.
class ConvergenceError : public Error
{
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error
{
public:
    using Error::Error;
};

/// Dimension outside the supported range [1, kMaxDim].
class DimensionError : public Error
{
public:
    using Error::Error;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class SingularMap : public Error
{
public:
    using Error::Error;
};

/// A computed quantity violated a contract by more than round-off.
class NumericalError : public Error
{
public:
    using Error::Error;
};

/// Malformed external input (JSON documents, CSV, config files).
class InvalidInput : public Error
{
public:
    using Error::Error;
};

} // namespace klt
