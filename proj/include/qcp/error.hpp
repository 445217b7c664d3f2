#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// The generator ran out of cells that admit a consistent value.
class PlacementExhausted : public Error
{
public:
    using Error::Error;
};

/// A distribution carries censored mass where an operation needs the full law.
class CensoredData : public Error
{
public:
    using Error::Error;
};

/// Malformed input. line() is 1-based, or 0 when no line applies.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string & what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    [[nodiscard]] auto line() const noexcept -> std::size_t { return line_; }

private:
    std::size_t line_;
};

} // namespace qcp
