#include "saasqual/cluster_quality.hpp"

#include <map>
#include <utility>

namespace saasqual {

namespace {
double pairs(double count) { return count * (count - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw Error(ErrorKind::LengthMismatch, "label sequences differ in length");
    }
    if (labels_a.size() < 2) {
        throw Error(ErrorKind::TooFewPoints, "adjusted Rand index needs at least two points");
    }
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        table[{labels_a[i], labels_b[i]}] += 1.0;
        rows[labels_a[i]] += 1.0;
        cols[labels_b[i]] += 1.0;
    }
    double index = 0.0;
    for (const auto& [cell, count] : table) index += pairs(count);
    double sum_a = 0.0;
    for (const auto& [label, count] : rows) sum_a += pairs(count);
    double sum_b = 0.0;
    for (const auto& [label, count] : cols) sum_b += pairs(count);

    const double expected = sum_a * sum_b / pairs(static_cast<double>(labels_a.size()));
    const double maximum = 0.5 * (sum_a + sum_b);
    // Zero denominator only when both partitions are all-singletons or both
    // a single block, i.e. identical.
    if (maximum == expected) {
        return 1.0;
    }
    return (index - expected) / (maximum - expected);
}

}  // namespace saasqual
