#ifndef SAASQUAL_TESTKIT_HPP
#define SAASQUAL_TESTKIT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saasqual/dataset.hpp"

/**
 * @file testkit.hpp
 * @brief Synthetic rating data with planted clusters.
 *
 * Points are drawn from isotropic Gaussians about planted means using
 * saasqual::Rng (std::mt19937_64 bit stream, Box-Muller normals), then each
 * coordinate is clamped into the 1..10 rating scale.
 */

namespace saasqual::testkit {

struct PlantedSpec {
    std::string name;
    int num_clusters = 1;
    int points_per_cluster = 20;
    std::vector<RatingVector> cluster_means;
    /// Standard deviation of the per-coordinate noise. Zero gives noiseless rows.
    double sigma = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedDataset {
    DataMatrix matrix;
    std::vector<int> labels;
    PlantedSpec spec;
};

/// Rows are cluster-major; row ids are "svc-NNNN" numbered from 1.
PlantedDataset generate_planted(const PlantedSpec& spec);

/**
 * Means for `num_clusters` ordered quality tiers with pairwise Euclidean
 * separation of at least `separation`. Tiers climb the all-ones diagonal in
 * steps of separation / 2 and alternate sides along the direction
 * (1,1,1,-1,-1,-1), so adjacent tiers are exactly `separation` apart and
 * overall (mean) rating rises with the tier index. The tiers average 5.5
 * along the diagonal.
 */
std::vector<RatingVector> tier_means(int num_clusters, double separation);

/**
 * Fixed catalog: "single-blob" (60 points, sigma 0.5) plus
 * "{two,three,four}-tier-sep{2,4,6}" at sigma 0.3 and the same names with a
 * "-noisy" suffix at sigma 0.8; 20 points per cluster. 19 entries.
 */
std::vector<PlantedSpec> default_saas_scenarios();

std::optional<PlantedSpec> find_scenario(std::string_view name);

/// Feedback records for a generated dataset, one synthetic user per row.
std::vector<FeedbackRecord> to_feedback_records(const PlantedDataset& dataset);

/// Sidecar labels file: header "row_id,label" then one line per row.
std::string format_labels_csv(const PlantedDataset& dataset);

}  // namespace saasqual::testkit

#endif
