#pragma once

#include <stdexcept>
#include <string>

namespace lasted {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand extents do not satisfy an operation's contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity was produced or detected.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or configuration value.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable input data (images, corpora, checkpoints).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace lasted
