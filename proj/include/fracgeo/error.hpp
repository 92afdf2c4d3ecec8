#pragma once

#include <stdexcept>
#include <string>

namespace fracgeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A configured size guard (cell count, pair count, LP scale) was exceeded.
class CapacityExceeded : public Error {
public:
    using Error::Error;
};

/// Two objects that must share a grid domain do not.
class DomainMismatch : public Error {
public:
    DomainMismatch() : Error("objects are defined on different grid domains") {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

} // namespace fracgeo
