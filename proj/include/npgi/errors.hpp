#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npgi {

/// Syntax or semantic error in a problem or policy file.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// A problem failed validation when a validated model was requested.
class InvalidProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A policy graph is not temporally consistent with the problem it is used on.
class InvalidPolicy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The posterior for an observation with zero prior probability was requested.
class ZeroProbabilityObservation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact history enumeration grew beyond the configured number of entries.
class CombinatorialLimitExceeded : public std::runtime_error {
public:
    CombinatorialLimitExceeded(std::size_t entries, std::size_t cap)
        : std::runtime_error("exact enumeration needs more than " + std::to_string(cap) +
                             " belief entries (reached " + std::to_string(entries) + ")"),
          entries_(entries) {}

    std::size_t entries() const noexcept { return entries_; }

private:
    std::size_t entries_;
};

/// A node value was requested for a node that is reached with probability zero.
class UnreachableNode : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive policy enumeration would exceed the configured cap.
class CapExceeded : public std::runtime_error {
public:
    explicit CapExceeded(double count)
        : std::runtime_error("enumeration of " + std::to_string(count) +
                             " joint policies exceeds the cap"),
          count_(count) {}

    double count() const noexcept { return count_; }

private:
    double count_;
};

}  // namespace npgi
