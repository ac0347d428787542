#pragma once

#include <stdexcept>
#include <string>

namespace khan {

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Numeric = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// An edge standard deviation is exactly zero, so no z-score exists.
struct DegenerateVariance : NumericError {
    DegenerateVariance(int u, int v)
        : NumericError("degenerate variance on edge (" + std::to_string(u) + "," + std::to_string(v) + ")"),
          u(u), v(v) {}
    int u, v;
};

struct DegenerateDenominator : NumericError {
    explicit DegenerateDenominator(int u)
        : NumericError("degenerate debiasing denominator at column " + std::to_string(u)), column(u) {}
    int column;
};

struct CholeskyFailure : NumericError {
    CholeskyFailure() : NumericError("matrix is not numerically positive definite") {}
};

struct NotAForest : DataError {
    NotAForest() : DataError("graph contains a cycle; exact tree sampling requires a forest") {}
};

/// A combinatorial enumeration exceeded its configured cap.
struct BudgetError : ConfigError {
    explicit BudgetError(const std::string& what) : ConfigError(what) {}
};

}  // namespace khan
