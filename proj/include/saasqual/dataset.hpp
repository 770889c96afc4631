#ifndef SAASQUAL_DATASET_HPP
#define SAASQUAL_DATASET_HPP

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "saasqual/features.hpp"

namespace saasqual {

/// One user's ratings of one offering.
struct FeedbackRecord {
    std::string offering_id;
    std::string user_id;
    std::optional<std::string> timestamp;
    RatingVector ratings;
};

/// Component-wise mean of all records for one offering.
struct OfferingProfile {
    std::string offering_id;
    int record_count = 0;
    RatingVector mean_ratings;
};

enum class Unit { Offerings, Records };

std::string_view to_string(Unit unit);
Unit parse_unit(std::string_view text);

/**
 * The observation matrix handed to the clustering code: one row per
 * observation, one column per key feature, plus a unique identifier per row.
 *
 * Construction validates the column count and identifier uniqueness.
 */
class DataMatrix {
public:
    DataMatrix(Eigen::MatrixXd values, std::vector<std::string> row_ids, Unit unit);

    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    Unit unit() const { return unit_; }
    Eigen::Index rows() const { return values_.rows(); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> row_ids_;
    Unit unit_;
};

/// Exact header line expected at the top of a feedback CSV.
inline constexpr std::string_view kFeedbackHeader =
    "offering_id,user_id,timestamp,reusability,availability,scalability,pay_per_use,"
    "customizability,data_managed_by_providers";

/**
 * Parse a feedback CSV. Rows are returned in file order; blank lines are
 * skipped. Fields are not quoted, so identifiers may not contain commas.
 *
 * Throws Error(MalformedHeader), RowError(MalformedRow) or
 * RatingOutOfRangeError. Row numbers in diagnostics are 1-based and count
 * data rows only.
 */
std::vector<FeedbackRecord> parse_feedback_csv(std::istream& in);
std::vector<FeedbackRecord> parse_feedback_csv(std::string_view text);

/// Serialize records in the feedback CSV format, ratings in shortest
/// round-trip decimal form.
std::string format_feedback_csv(const std::vector<FeedbackRecord>& records);

/// One profile per distinct offering_id, sorted by offering_id (byte order).
/// The result does not depend on the order of `records`.
std::vector<OfferingProfile> aggregate_by_offering(const std::vector<FeedbackRecord>& records);

DataMatrix to_matrix(const std::vector<OfferingProfile>& profiles);
DataMatrix to_matrix(const std::vector<FeedbackRecord>& records);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace saasqual

#endif
