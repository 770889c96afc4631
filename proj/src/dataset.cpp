#include "saasqual/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "saasqual/error.hpp"

namespace saasqual {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool is_timestamp(std::string_view s) {
    static const std::regex pattern(
        R"(\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?Z)?)");
    return std::regex_match(s.begin(), s.end(), pattern);
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    if (text.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value,
                                           std::chars_format::general);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

FeedbackRecord parse_row(std::string_view line, std::size_t row) {
    const auto fields = split_commas(line);
    if (fields.size() != 3 + kFeatureCount) {
        throw RowError(ErrorKind::MalformedRow, row,
                       "expected " + std::to_string(3 + kFeatureCount) + " fields, found " +
                           std::to_string(fields.size()));
    }
    FeedbackRecord record;
    record.offering_id = std::string(trim(fields[0]));
    record.user_id = std::string(trim(fields[1]));
    if (record.offering_id.empty()) {
        throw RowError(ErrorKind::MalformedRow, row, "empty offering_id");
    }
    if (record.user_id.empty()) {
        throw RowError(ErrorKind::MalformedRow, row, "empty user_id");
    }
    const auto stamp = trim(fields[2]);
    if (!stamp.empty()) {
        if (!is_timestamp(stamp)) {
            throw RowError(ErrorKind::MalformedRow, row,
                           "timestamp '" + std::string(stamp) + "' is not ISO-8601 UTC");
        }
        record.timestamp = std::string(stamp);
    }
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto field = fields[3 + f];
        const auto value = parse_number(field);
        if (!value) {
            throw RowError(ErrorKind::MalformedRow, row,
                           std::string(kFeatureColumns[f]) + " rating '" +
                               std::string(trim(field)) + "' is not a number");
        }
        if (*value < kRatingMin || *value > kRatingMax) {
            throw RatingOutOfRangeError(row, std::string(kFeatureColumns[f]), *value);
        }
        record.ratings[f] = *value;
    }
    return record;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

}  // namespace

std::string_view to_string(Unit unit) {
    return unit == Unit::Offerings ? "offerings" : "records";
}

Unit parse_unit(std::string_view text) {
    if (text == "offerings") return Unit::Offerings;
    if (text == "records") return Unit::Records;
    throw Error(ErrorKind::InvalidConfig, "unit must be 'offerings' or 'records'");
}

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> row_ids, Unit unit)
    : values_(std::move(values)), row_ids_(std::move(row_ids)), unit_(unit) {
    if (values_.rows() == 0) {
        throw Error(ErrorKind::EmptyInput, "data matrix has no rows");
    }
    if (values_.cols() != kFeatureCount) {
        throw Error(ErrorKind::DimensionMismatch,
                    "data matrix must have " + std::to_string(kFeatureCount) + " columns");
    }
    if (static_cast<Eigen::Index>(row_ids_.size()) != values_.rows()) {
        throw Error(ErrorKind::LengthMismatch, "row_ids and rows differ in length");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : row_ids_) {
        if (!seen.insert(id).second) {
            throw Error(ErrorKind::MalformedRow, "duplicate row id '" + id + "'");
        }
    }
}

std::vector<FeedbackRecord> parse_feedback_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedHeader, "missing header row");
    }
    strip_cr(line);
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) {
        line.erase(0, 3);
    }
    if (line != kFeedbackHeader) {
        throw Error(ErrorKind::MalformedHeader,
                    "header must be exactly '" + std::string(kFeedbackHeader) + "'");
    }

    std::vector<FeedbackRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        records.push_back(parse_row(line, row));
    }
    return records;
}

std::vector<FeedbackRecord> parse_feedback_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_feedback_csv(in);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string format_feedback_csv(const std::vector<FeedbackRecord>& records) {
    std::string out(kFeedbackHeader);
    out += '\n';
    for (const auto& r : records) {
        out += r.offering_id;
        out += ',';
        out += r.user_id;
        out += ',';
        if (r.timestamp) {
            out += *r.timestamp;
        }
        for (int f = 0; f < kFeatureCount; ++f) {
            out += ',';
            out += format_double(r.ratings[f]);
        }
        out += '\n';
    }
    return out;
}

std::vector<OfferingProfile> aggregate_by_offering(const std::vector<FeedbackRecord>& records) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyInput, "no feedback records to aggregate");
    }
    std::map<std::string, std::vector<const FeedbackRecord*>> groups;
    for (const auto& r : records) {
        groups[r.offering_id].push_back(&r);
    }

    std::vector<OfferingProfile> profiles;
    profiles.reserve(groups.size());
    std::vector<double> column;
    for (const auto& [id, members] : groups) {
        OfferingProfile profile;
        profile.offering_id = id;
        profile.record_count = static_cast<int>(members.size());
        for (int f = 0; f < kFeatureCount; ++f) {
            column.clear();
            for (const auto* r : members) {
                column.push_back(r->ratings[f]);
            }
            // Sorted summation makes the mean independent of input order.
            std::sort(column.begin(), column.end());
            double sum = 0.0;
            for (double v : column) {
                sum += v;
            }
            const double mean = sum / static_cast<double>(column.size());
            profile.mean_ratings[f] = std::clamp(mean, column.front(), column.back());
        }
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

DataMatrix to_matrix(const std::vector<OfferingProfile>& profiles) {
    if (profiles.empty()) {
        throw Error(ErrorKind::EmptyInput, "no offering profiles");
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(profiles.size()), kFeatureCount);
    std::vector<std::string> ids;
    ids.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        values.row(static_cast<Eigen::Index>(i)) = profiles[i].mean_ratings.transpose();
        ids.push_back(profiles[i].offering_id);
    }
    return DataMatrix(std::move(values), std::move(ids), Unit::Offerings);
}

DataMatrix to_matrix(const std::vector<FeedbackRecord>& records) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyInput, "no feedback records");
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(records.size()), kFeatureCount);
    std::vector<std::string> ids;
    ids.reserve(records.size());
    std::unordered_set<std::string> taken;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        values.row(static_cast<Eigen::Index>(i)) = r.ratings.transpose();
        std::string id = r.offering_id + "/" + r.user_id;
        if (r.timestamp) {
            id += "/" + *r.timestamp;
        }
        if (taken.count(id) != 0) {
            // Second occurrence gets "#1", third "#2", skipping any that exist.
            int suffix = 1;
            while (taken.count(id + "#" + std::to_string(suffix)) != 0) {
                ++suffix;
            }
            id += "#" + std::to_string(suffix);
        }
        taken.insert(id);
        ids.push_back(std::move(id));
    }
    return DataMatrix(std::move(values), std::move(ids), Unit::Records);
}

}  // namespace saasqual
