#pragma once

#include <stdexcept>
#include <string>

namespace scb {

/// Broad failure categories. The CLI maps these onto stable exit codes.
enum class ErrorKind {
    InvalidArgument,  ///< caller violated a documented precondition
    Parse,            ///< malformed input file or configuration
    Degenerate,       ///< zero variance, too few curves, RSS of zero, ...
    IllPosed,         ///< bandwidth leaves an evaluation point with too few design points
    Numerical,        ///< factorization or rank failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace scb
