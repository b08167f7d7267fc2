#pragma once

#include <stdexcept>
#include <string>

namespace lsl {

/// Broad failure classes; the CLI maps each one onto a process exit code.
enum class ErrorKind {
    configuration,  // bad config, non-nested grids, CFL violation
    dimension,      // mismatched shapes or lengths
    domain,         // input outside the mathematical domain (e.g. q < 0)
    precondition,   // missing data entries, absent background pairs
    numerical,      // factorization failure, degenerate data, over-regularization
    format,         // malformed or truncated files
    io              // filesystem errors
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error configuration_error(const std::string& what) { return {ErrorKind::configuration, what}; }
inline Error dimension_error(const std::string& what) { return {ErrorKind::dimension, what}; }
inline Error domain_error(const std::string& what) { return {ErrorKind::domain, what}; }
inline Error precondition_error(const std::string& what) { return {ErrorKind::precondition, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::numerical, what}; }
inline Error format_error(const std::string& what) { return {ErrorKind::format, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }

/// Process exit code for an error class: 2 configuration, 3 numerical, 4 I/O.
int exit_code(ErrorKind kind) noexcept;

}  // namespace lsl
