#include "saasqual/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "saasqual/error.hpp"

namespace saasqual {

std::string_view to_string(QualityTier tier) {
    switch (tier) {
        case QualityTier::Basic: return "Basic";
        case QualityTier::Standard: return "Standard";
        case QualityTier::Optimized: return "Optimized";
        case QualityTier::Integrated: return "Integrated";
    }
    return "Basic";
}

QualityTier parse_tier(std::string_view text) {
    for (auto tier : {QualityTier::Basic, QualityTier::Standard, QualityTier::Optimized, QualityTier::Integrated}) {
        if (to_string(tier) == text) return tier;
    }
    throw Error(ErrorKind::MalformedDocument, "unknown tier '" + std::string(text) + "'");
}

FeatureWeights::FeatureWeights(const RatingVector& raw) {
    if (!raw.allFinite() || (raw.array() < 0.0).any()) {
        throw Error(ErrorKind::InvalidConfig, "feature weights must be finite and non-negative");
    }
    const double total = raw.sum();
    if (!(total > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "at least one feature weight must be positive");
    }
    values_ = raw / total;
}

FittedModel to_fitted_model(const FitResult<double>& fit, const FitConfig& config) {
    FittedModel model;
    model.config = config;
    model.config.num_clusters = static_cast<int>(fit.params.num_clusters());
    model.params = fit.params;
    model.log_likelihood = fit.log_likelihood();
    model.iterations_run = fit.iterations_run;
    model.converged = fit.converged;
    model.best_restart_index = fit.best_restart_index;
    return model;
}

std::vector<ClusterProfile> rank_clusters(const MixtureParams<double>& params, const std::vector<int>& sizes) {
    const auto m = params.num_clusters();
    std::vector<ClusterProfile> profiles;
    profiles.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
        ClusterProfile p;
        p.cluster_index = static_cast<int>(k);
        p.mean_ratings = params.means.row(k).transpose();
        p.overall_score = p.mean_ratings.mean();
        p.size = sizes.empty() ? 0 : sizes[static_cast<std::size_t>(k)];
        profiles.push_back(p);
    }
    std::sort(profiles.begin(), profiles.end(), [](const ClusterProfile& a, const ClusterProfile& b) {
        if (a.overall_score != b.overall_score) return a.overall_score > b.overall_score;
        for (int f = 0; f < kFeatureCount; ++f) {
            if (a.mean_ratings[f] != b.mean_ratings[f]) return a.mean_ratings[f] > b.mean_ratings[f];
        }
        return a.cluster_index < b.cluster_index;
    });
    for (std::size_t r = 0; r < profiles.size(); ++r) {
        profiles[r].canonical_rank = static_cast<int>(r);
    }
    return profiles;
}

QualityTier tier_for_rank(int rank, int num_clusters) {
    const int steps = num_clusters <= 4 ? rank : (4 * rank) / num_clusters;
    return static_cast<QualityTier>(static_cast<int>(QualityTier::Integrated) - std::min(steps, 3));
}

std::vector<ClusterProfile> assign_tiers(std::vector<ClusterProfile> ranked, int num_clusters) {
    for (auto& p : ranked) {
        p.tier = tier_for_rank(p.canonical_rank, num_clusters);
    }
    return ranked;
}

namespace {

DataMatrix clustered_matrix(const std::vector<FeedbackRecord>& records,
                            const std::vector<OfferingProfile>& profiles, Unit unit) {
    return unit == Unit::Offerings ? to_matrix(profiles) : to_matrix(records);
}

}  // namespace

EvaluationReport build_report(const std::vector<FeedbackRecord>& records, Unit unit, const FittedModel& model) {
    const auto profiles = aggregate_by_offering(records);
    const auto matrix = clustered_matrix(records, profiles, unit);
    const auto& x = matrix.values();
    const int m = static_cast<int>(model.params.num_clusters());
    if (model.params.dimension() != x.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "model dimension does not match the feedback data");
    }

    EvaluationReport report;
    report.dataset = {static_cast<int>(x.rows()), unit, static_cast<int>(records.size()),
                      static_cast<int>(profiles.size())};
    report.mixture = model;
    report.model.selected_clusters = m;
    report.model.log_likelihood = model.log_likelihood;
    report.model.bic = bic(model.log_likelihood, m, kFeatureCount, model.params.kind, x.rows());
    report.model.aic = aic(model.log_likelihood, m, kFeatureCount, model.params.kind);
    report.model.iterations_run = model.iterations_run;
    report.model.converged = model.converged;

    const auto estep = e_step(x, model.params);
    const auto assignment = hard_assign(estep.responsibilities);
    report.quality = quality_indices(x, assignment);

    report.clusters = assign_tiers(rank_clusters(model.params, report.quality.cluster_sizes), m);
    std::vector<const ClusterProfile*> by_index(static_cast<std::size_t>(m));
    for (const auto& c : report.clusters) {
        by_index[static_cast<std::size_t>(c.cluster_index)] = &c;
    }

    const RatingVector global_mean = x.colwise().mean().transpose();
    for (const auto& profile : profiles) {
        const auto prediction = predict(model.params, profile.mean_ratings);
        const auto& cluster = *by_index[static_cast<std::size_t>(prediction.cluster_index)];
        OfferingRow row;
        row.offering_id = profile.offering_id;
        row.record_count = profile.record_count;
        row.mean_ratings = profile.mean_ratings;
        row.cluster_index = prediction.cluster_index;
        row.canonical_rank = cluster.canonical_rank;
        row.tier = cluster.tier;
        row.posterior = prediction.posterior[prediction.cluster_index];
        row.delta = profile.mean_ratings - global_mean;
        report.offerings.push_back(std::move(row));
    }
    std::sort(report.offerings.begin(), report.offerings.end(), [](const OfferingRow& a, const OfferingRow& b) {
        if (a.tier != b.tier) return a.tier > b.tier;
        if (a.posterior != b.posterior) return a.posterior > b.posterior;
        return a.offering_id < b.offering_id;
    });
    return report;
}

EvaluationReport evaluate(const std::vector<FeedbackRecord>& records, const EvaluationConfig& config) {
    const auto profiles = aggregate_by_offering(records);
    const auto matrix = clustered_matrix(records, profiles, config.unit);

    FittedModel model;
    if (config.clusters) {
        FitConfig fit = config.fit;
        fit.num_clusters = *config.clusters;
        model = to_fitted_model(fit_em(matrix.values(), fit), fit);
    } else {
        SweepConfig sweep{config.k_min, config.k_max, config.fit};
        const auto result = sweep_k(matrix.values(), sweep);
        model = to_fitted_model(result.selected().fit, config.fit);
    }
    return build_report(records, config.unit, model);
}

std::vector<Recommendation> recommend(const EvaluationReport& report, const FeatureWeights& weights, int top_n) {
    if (report.offerings.empty()) {
        throw Error(ErrorKind::EmptyReport, "report has no offerings to recommend");
    }
    if (top_n < 1) {
        throw Error(ErrorKind::InvalidConfig, "top must be >= 1");
    }
    std::vector<Recommendation> out;
    out.reserve(report.offerings.size());
    for (const auto& row : report.offerings) {
        out.push_back({0, row.offering_id, weights.values().dot(row.mean_ratings), row.tier, row.cluster_index});
    }
    std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.tier != b.tier) return a.tier > b.tier;
        return a.offering_id < b.offering_id;
    });
    if (out.size() > static_cast<std::size_t>(top_n)) {
        out.resize(static_cast<std::size_t>(top_n));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = static_cast<int>(i) + 1;
    }
    return out;
}

namespace {

std::string fixed(double value, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    return buf;
}

std::string pad(std::string_view text, std::size_t width, bool right = false) {
    std::string out(text);
    if (out.size() >= width) return out;
    const std::string fill(width - out.size(), ' ');
    return right ? fill + out : out + fill;
}

}  // namespace

std::string render_report_table(const EvaluationReport& report) {
    std::ostringstream os;
    os << "n=" << report.dataset.n << " unit=" << to_string(report.dataset.unit)
       << " records=" << report.dataset.record_count << " offerings=" << report.dataset.offering_count << '\n';
    os << "clusters=" << report.model.selected_clusters << " log_likelihood=" << fixed(report.model.log_likelihood, 4)
       << " bic=" << fixed(report.model.bic, 4) << " converged=" << (report.model.converged ? "yes" : "no")
       << " iterations=" << report.model.iterations_run << '\n';
    os << "mean_silhouette=" << fixed(report.quality.mean_silhouette, 4) << " davies_bouldin="
       << (report.quality.davies_bouldin ? fixed(*report.quality.davies_bouldin, 4) : std::string("n/a")) << "\n\n";

    os << pad("rank", 5) << pad("cluster", 8) << pad("tier", 11) << pad("size", 6, true) << pad("score", 8, true);
    for (auto col : kFeatureColumns) os << ' ' << pad(col.substr(0, 6), 6, true);
    os << '\n';
    for (const auto& c : report.clusters) {
        os << pad(std::to_string(c.canonical_rank), 5) << pad(std::to_string(c.cluster_index), 8)
           << pad(to_string(c.tier), 11) << pad(std::to_string(c.size), 6, true) << pad(fixed(c.overall_score), 8, true);
        for (int f = 0; f < kFeatureCount; ++f) os << ' ' << pad(fixed(c.mean_ratings[f]), 6, true);
        os << '\n';
    }
    os << '\n';

    std::size_t id_width = 12;
    for (const auto& r : report.offerings) id_width = std::max(id_width, r.offering_id.size() + 1);
    os << pad("offering_id", id_width) << pad("tier", 11) << pad("cluster", 8) << pad("post", 7, true)
       << pad("n", 5, true);
    for (auto col : kFeatureColumns) os << ' ' << pad(col.substr(0, 6), 6, true);
    os << '\n';
    for (const auto& r : report.offerings) {
        os << pad(r.offering_id, id_width) << pad(to_string(r.tier), 11) << pad(std::to_string(r.cluster_index), 8)
           << pad(fixed(r.posterior, 3), 7, true) << pad(std::to_string(r.record_count), 5, true);
        for (int f = 0; f < kFeatureCount; ++f) os << ' ' << pad(fixed(r.mean_ratings[f]), 6, true);
        os << '\n';
    }
    return os.str();
}

std::string render_recommendations_table(const std::vector<Recommendation>& recommendations) {
    std::size_t id_width = 12;
    for (const auto& r : recommendations) id_width = std::max(id_width, r.offering_id.size() + 1);
    std::ostringstream os;
    os << pad("rank", 5) << pad("offering_id", id_width) << pad("score", 8, true) << "  " << pad("tier", 11)
       << "cluster\n";
    for (const auto& r : recommendations) {
        os << pad(std::to_string(r.rank), 5) << pad(r.offering_id, id_width) << pad(fixed(r.score, 3), 8, true)
           << "  " << pad(to_string(r.tier), 11) << r.cluster_index << '\n';
    }
    return os.str();
}

}  // namespace saasqual
