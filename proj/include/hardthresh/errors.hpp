#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hardthresh {

// Base for every error raised by the library. Callers that only care about
// "something in the pipeline failed" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// (X'X + lambda I) cannot be inverted (lambda == 0 with a rank deficient design).
class SingularSystem : public Error {
public:
    using Error::Error;
};

// Every coefficient of the initial estimate is exactly zero, so no positive
// threshold can be formed.
class AllZero : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row, std::string column)
        : Error(msg), row_(row), column_(std::move(column)) {}

    // 1-based line number in the file (the header is line 1).
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(std::string column)
        : Error("missing column: " + column), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(std::string column)
        : Error("column has zero variance: " + column), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class IoError : public Error {
public:
    IoError(const std::string& msg, std::string path)
        : Error(msg + ": " + path), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// A Monte Carlo replication failed; carries the derived seed so the run can be
// reproduced in isolation.
class ReplicationError : public Error {
public:
    ReplicationError(const std::string& msg, std::uint64_t seed)
        : Error(msg + " (seed " + std::to_string(seed) + ")"), seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace hardthresh
