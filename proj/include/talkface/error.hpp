#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace talkface {

/// Failure categories. The CLI maps each to a distinct exit code.
enum class ErrorKind {
    structural,  // wrong arity / shape
    numeric,     // non-finite values
    geometry,    // degenerate geometry
    domain,      // argument outside its valid range
    data,        // malformed or inconsistent input files
    config,      // invalid configuration
    usage,       // API misuse (missing checkpoint, non-scalar grad check, ...)
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind)
    { }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what)
{
    if (!ok)
        fail(kind, what);
}

}  // namespace talkface
