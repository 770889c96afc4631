#ifndef SAASQUAL_ERROR_HPP
#define SAASQUAL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saasqual {

enum class ErrorKind {
    // input data
    MalformedHeader,
    MalformedRow,
    RatingOutOfRange,
    EmptyInput,
    MalformedDocument,
    Io,
    // shape / contract
    DimensionMismatch,
    TooFewPoints,
    LengthMismatch,
    EmptyReport,
    EmptyCluster,
    // configuration
    InvalidConfig,
    InvalidRange,
    InvalidSpec,
    // numerics
    SingularCovariance,
    UndefinedForSingleCluster,
    CoincidentCentroids,
};

/// Coarse grouping used by the command-line front end to pick an exit code.
enum class ErrorCategory { Usage, Data, Numeric };

const char* to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }

private:
    ErrorKind kind_;
};

/// Raised by the CSV reader for a specific data row (1-based, header excluded).
class RowError : public Error {
public:
    RowError(ErrorKind kind, std::size_t row, const std::string& what)
        : Error(kind, "row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class RatingOutOfRangeError : public RowError {
public:
    RatingOutOfRangeError(std::size_t row, std::string feature, double value);

    const std::string& feature() const noexcept { return feature_; }
    double value() const noexcept { return value_; }

private:
    std::string feature_;
    double value_;
};

}  // namespace saasqual

#endif
