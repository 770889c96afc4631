#include "saasqual/testkit.hpp"

#include <algorithm>
#include <cmath>

#include "saasqual/error.hpp"
#include "saasqual/random.hpp"

namespace saasqual::testkit {

void PlantedSpec::validate() const {
    if (num_clusters < 1) throw Error(ErrorKind::InvalidSpec, "planted spec needs at least one cluster");
    if (points_per_cluster < 1) throw Error(ErrorKind::InvalidSpec, "points_per_cluster must be >= 1");
    if (static_cast<int>(cluster_means.size()) != num_clusters) {
        throw Error(ErrorKind::InvalidSpec, "one mean per planted cluster is required");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidSpec, "sigma must be >= 0");
    for (const auto& mean : cluster_means) {
        if (!within_rating_scale(mean)) throw Error(ErrorKind::InvalidSpec, "planted mean outside [1, 10]");
    }
}

PlantedDataset generate_planted(const PlantedSpec& spec) {
    spec.validate();
    const int n = spec.num_clusters * spec.points_per_cluster;
    const int width = std::max(4, static_cast<int>(std::to_string(n).size()));

    Eigen::MatrixXd values(n, kFeatureCount);
    std::vector<std::string> ids;
    std::vector<int> labels;
    ids.reserve(static_cast<std::size_t>(n));
    labels.reserve(static_cast<std::size_t>(n));

    Rng rng(spec.seed);
    int row = 0;
    for (int k = 0; k < spec.num_clusters; ++k) {
        const auto& mean = spec.cluster_means[static_cast<std::size_t>(k)];
        for (int p = 0; p < spec.points_per_cluster; ++p, ++row) {
            for (int f = 0; f < kFeatureCount; ++f) {
                const double noise = rng.normal();
                values(row, f) = std::clamp(mean[f] + spec.sigma * noise, kRatingMin, kRatingMax);
            }
            const auto number = std::to_string(row + 1);
            ids.push_back("svc-" + std::string(static_cast<std::size_t>(width) - number.size(), '0') + number);
            labels.push_back(k);
        }
    }
    return PlantedDataset{DataMatrix(std::move(values), std::move(ids), Unit::Offerings), std::move(labels), spec};
}

std::vector<RatingVector> tier_means(int num_clusters, double separation) {
    const RatingVector diagonal = RatingVector::Constant(1.0 / std::sqrt(6.0));
    RatingVector zigzag;
    zigzag << 1, 1, 1, -1, -1, -1;
    zigzag /= std::sqrt(6.0);

    const double step = separation / 2.0;
    const double swing = separation * std::sqrt(3.0) / 4.0;
    std::vector<RatingVector> means;
    for (int k = 0; k < num_clusters; ++k) {
        const double along = (k - (num_clusters - 1) / 2.0) * step;
        const double across = num_clusters == 1 ? 0.0 : (k % 2 == 0 ? swing : -swing);
        means.push_back(RatingVector::Constant(5.5) + along * diagonal + across * zigzag);
    }
    return means;
}

std::vector<PlantedSpec> default_saas_scenarios() {
    std::vector<PlantedSpec> catalog;
    PlantedSpec blob;
    blob.name = "single-blob";
    blob.num_clusters = 1;
    blob.points_per_cluster = 60;
    blob.cluster_means = {RatingVector::Constant(5.5)};
    blob.sigma = 0.5;
    catalog.push_back(blob);

    const char* counts[] = {"two", "three", "four"};
    for (int k = 2; k <= 4; ++k) {
        for (int sep : {2, 4, 6}) {
            for (double sigma : {0.3, 0.8}) {
                PlantedSpec spec;
                spec.name = std::string(counts[k - 2]) + "-tier-sep" + std::to_string(sep) +
                            (sigma > 0.5 ? "-noisy" : "");
                spec.num_clusters = k;
                spec.points_per_cluster = 20;
                spec.cluster_means = tier_means(k, sep);
                spec.sigma = sigma;
                catalog.push_back(std::move(spec));
            }
        }
    }
    return catalog;
}

std::optional<PlantedSpec> find_scenario(std::string_view name) {
    for (auto& spec : default_saas_scenarios()) {
        if (spec.name == name) return spec;
    }
    return std::nullopt;
}

std::vector<FeedbackRecord> to_feedback_records(const PlantedDataset& dataset) {
    std::vector<FeedbackRecord> records;
    const auto& values = dataset.matrix.values();
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        FeedbackRecord r;
        r.offering_id = dataset.matrix.row_ids()[static_cast<std::size_t>(i)];
        r.user_id = "synth";
        r.ratings = values.row(i).transpose();
        records.push_back(std::move(r));
    }
    return records;
}

std::string format_labels_csv(const PlantedDataset& dataset) {
    std::string out = "row_id,label\n";
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        out += dataset.matrix.row_ids()[i];
        out += ',';
        out += std::to_string(dataset.labels[i]);
        out += '\n';
    }
    return out;
}

}  // namespace saasqual::testkit
