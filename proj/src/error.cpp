#include "saasqual/error.hpp"

#include <sstream>

namespace saasqual {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::RatingOutOfRange: return "RatingOutOfRange";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::MalformedDocument: return "MalformedDocument";
        case ErrorKind::Io: return "Io";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyReport: return "EmptyReport";
        case ErrorKind::EmptyCluster: return "EmptyCluster";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InvalidRange: return "InvalidRange";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::SingularCovariance: return "SingularCovariance";
        case ErrorKind::UndefinedForSingleCluster: return "UndefinedForSingleCluster";
        case ErrorKind::CoincidentCentroids: return "CoincidentCentroids";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidRange:
        case ErrorKind::InvalidSpec:
            return ErrorCategory::Usage;
        case ErrorKind::SingularCovariance:
        case ErrorKind::UndefinedForSingleCluster:
        case ErrorKind::CoincidentCentroids:
            return ErrorCategory::Numeric;
        default:
            return ErrorCategory::Data;
    }
}

namespace {
std::string describe_out_of_range(const std::string& feature, double value) {
    std::ostringstream os;
    os << feature << " rating " << value << " outside [1, 10]";
    return os.str();
}
}  // namespace

RatingOutOfRangeError::RatingOutOfRangeError(std::size_t row, std::string feature, double value)
    : RowError(ErrorKind::RatingOutOfRange, row, describe_out_of_range(feature, value)),
      feature_(std::move(feature)),
      value_(value) {}

}  // namespace saasqual
