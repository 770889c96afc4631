#ifndef SAASQUAL_EVALUATION_HPP
#define SAASQUAL_EVALUATION_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saasqual/cluster_quality.hpp"
#include "saasqual/dataset.hpp"
#include "saasqual/gmm.hpp"
#include "saasqual/model_selection.hpp"

namespace saasqual {

/// Ordered service levels, lowest first.
enum class QualityTier { Basic = 0, Standard = 1, Optimized = 2, Integrated = 3 };

std::string_view to_string(QualityTier tier);
QualityTier parse_tier(std::string_view text);

struct ClusterProfile {
    int cluster_index = 0;
    /// 0 is the best cluster.
    int canonical_rank = 0;
    RatingVector mean_ratings;
    /// Unweighted mean of the six mean ratings.
    double overall_score = 0.0;
    int size = 0;
    QualityTier tier = QualityTier::Basic;
};

/// Non-negative per-feature preference weights, normalized to sum to one.
class FeatureWeights {
public:
    explicit FeatureWeights(const RatingVector& raw);
    static FeatureWeights uniform() { return FeatureWeights(RatingVector::Ones()); }

    const RatingVector& values() const { return values_; }

private:
    RatingVector values_;
};

/// A fitted mixture together with the settings and diagnostics it came from.
/// This is what gets persisted as a model file.
struct FittedModel {
    FitConfig config;
    MixtureParams<double> params;
    double log_likelihood = 0.0;
    int iterations_run = 0;
    bool converged = false;
    int best_restart_index = 0;
};

FittedModel to_fitted_model(const FitResult<double>& fit, const FitConfig& config);

struct DatasetSummary {
    int n = 0;
    Unit unit = Unit::Offerings;
    int record_count = 0;
    int offering_count = 0;
};

struct ModelSummary {
    int selected_clusters = 0;
    double log_likelihood = 0.0;
    double bic = 0.0;
    double aic = 0.0;
    int iterations_run = 0;
    bool converged = false;
};

struct OfferingRow {
    std::string offering_id;
    int record_count = 0;
    RatingVector mean_ratings;
    int cluster_index = 0;
    int canonical_rank = 0;
    QualityTier tier = QualityTier::Basic;
    /// Largest posterior membership probability of the offering's profile.
    double posterior = 0.0;
    /// mean_ratings minus the mean of the clustered data rows.
    RatingVector delta;
};

struct EvaluationReport {
    static constexpr int kSchemaVersion = 1;

    DatasetSummary dataset;
    ModelSummary model;
    FittedModel mixture;
    /// Sorted by canonical rank.
    std::vector<ClusterProfile> clusters;
    /// Sorted by tier (descending), posterior (descending), offering_id.
    std::vector<OfferingRow> offerings;
    QualityIndices quality;
};

struct EvaluationConfig {
    Unit unit = Unit::Offerings;
    /// Fixed cluster count; when empty the count is chosen by a BIC sweep.
    std::optional<int> clusters;
    /// Base fit settings, also used for every fit of a sweep.
    FitConfig fit;
    int k_min = 1;
    int k_max = 10;
};

/// Cluster profiles ordered best first: descending overall score, then
/// descending ratings feature by feature in canonical order, then index.
std::vector<ClusterProfile> rank_clusters(const MixtureParams<double>& params,
                                          const std::vector<int>& sizes = {});

/// With at most four clusters the best takes Integrated and each following
/// rank the next lower tier; beyond four, rank r takes the tier
/// floor(4 r / M) steps below Integrated.
std::vector<ClusterProfile> assign_tiers(std::vector<ClusterProfile> ranked, int num_clusters);

QualityTier tier_for_rank(int rank, int num_clusters);

/// Fits (or sweeps) and reports. Deterministic in (records, config).
EvaluationReport evaluate(const std::vector<FeedbackRecord>& records, const EvaluationConfig& config);

/// Builds the report for an already fitted model. `evaluate` ends here, so a
/// persisted model reproduces the same report from the same data.
EvaluationReport build_report(const std::vector<FeedbackRecord>& records, Unit unit, const FittedModel& model);

struct Recommendation {
    int rank = 0;
    std::string offering_id;
    double score = 0.0;
    QualityTier tier = QualityTier::Basic;
    int cluster_index = 0;
};

/// Offerings scored by weights . mean_ratings, best first; ties go to the
/// higher tier, then to the smaller offering_id. At most `top_n` entries.
std::vector<Recommendation> recommend(const EvaluationReport& report, const FeatureWeights& weights, int top_n);

std::string render_report_table(const EvaluationReport& report);
std::string render_recommendations_table(const std::vector<Recommendation>& recommendations);

}  // namespace saasqual

#endif
