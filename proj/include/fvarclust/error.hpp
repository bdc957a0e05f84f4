#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fvarclust {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidFiber : public Error {
public:
    using Error::Error;
};

class AllSegmentsDegenerate : public Error {
public:
    using Error::Error;
};

// A per-fiber failure raised while processing a fiber collection.
class FiberError : public Error {
public:
    FiberError(std::size_t index, const std::string& what)
        : Error("fiber " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ZeroNormFiber : public Error {
public:
    using Error::Error;
};

class SingularLandmarkBlock : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class MoreAtomsThanFibers : public Error {
public:
    using Error::Error;
};

class SingleClusterInput : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

// Malformed file content. `line()` is 1-based, 0 when not line oriented.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace fvarclust
