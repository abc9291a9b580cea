#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mwtrap {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument or out-of-domain input (CLI exit code 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input data; carries the offending line when known (CLI exit code 2).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// File-system failure: missing, unreadable, or unwritable path (CLI exit code 2).
class IoError : public Error {
public:
    using Error::Error;
};

/// Iterative solver or fit failed to converge. Carries the last iterate and,
/// for fits, the per-iteration trace that led there.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                     std::vector<std::vector<double>> trace = {})
        : Error(what), last_iterate_(std::move(last_iterate)), trace_(std::move(trace)) {}

    const std::vector<double>& last_iterate() const { return last_iterate_; }
    const std::vector<std::vector<double>>& trace() const { return trace_; }

private:
    std::vector<double> last_iterate_;
    std::vector<std::vector<double>> trace_;
};

/// A field evaluation point lies on (or too close to) a source wire segment.
class SingularityError : public DomainError {
public:
    SingularityError(const std::string& what, std::size_t segment_index)
        : DomainError(what), segment_index_(segment_index) {}
    std::size_t segment_index() const { return segment_index_; }

private:
    std::size_t segment_index_;
};

}  // namespace mwtrap
