#pragma once

#include <stdexcept>
#include <string>

namespace sapgp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// A factorization or iteration broke down numerically.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long row)
        : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

    long row() const noexcept { return row_; }

private:
    long row_;
};

// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A task on a pool worker threw; no partial results are returned.
class WorkerError : public Error {
public:
    WorkerError(int worker, const std::string& what)
        : Error("worker " + std::to_string(worker) + " failed: " + what), worker_(worker) {}

    int worker() const noexcept { return worker_; }

private:
    int worker_;
};

#define SAPGP_REQUIRE(cond, msg)                                   \
    do {                                                           \
        if (!(cond)) throw ::sapgp::ContractError(std::string(msg)); \
    } while (0)

}  // namespace sapgp
