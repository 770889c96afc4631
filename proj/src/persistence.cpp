#include "saasqual/persistence.hpp"

#include <cmath>

#include "saasqual/error.hpp"

namespace saasqual {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw Error(ErrorKind::MalformedDocument, what);
}

template <typename T>
T field(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        malformed(std::string("missing field '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        malformed(std::string("field '") + key + "' has the wrong type");
    }
}

json finite_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

template <typename Derived>
json vector_json(const Eigen::MatrixBase<Derived>& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<double>(v(i)));
    return out;
}

RatingVector rating_vector(const json& doc, const char* key) {
    const auto values = field<std::vector<double>>(doc, key);
    if (values.size() != kFeatureCount) malformed(std::string("'") + key + "' must have six entries");
    return Eigen::Map<const RatingVector>(values.data());
}

json config_to_json(const FitConfig& c) {
    return {{"num_clusters", c.num_clusters},   {"tolerance", c.tolerance},
            {"max_iterations", c.max_iterations}, {"seed", c.seed},
            {"covariance_kind", to_string(c.covariance_kind)},
            {"restarts", c.restarts},           {"variance_floor", c.variance_floor}};
}

FitConfig config_from_json(const json& doc) {
    FitConfig c;
    c.num_clusters = field<int>(doc, "num_clusters");
    c.tolerance = field<double>(doc, "tolerance");
    c.max_iterations = field<int>(doc, "max_iterations");
    c.seed = field<std::uint64_t>(doc, "seed");
    c.covariance_kind = parse_covariance_kind(field<std::string>(doc, "covariance_kind"));
    c.restarts = field<int>(doc, "restarts");
    c.variance_floor = field<double>(doc, "variance_floor");
    return c;
}

}  // namespace

nlohmann::json model_to_json(const FittedModel& model) {
    const auto& p = model.params;
    json means = json::array();
    json covariances = json::array();
    for (Eigen::Index k = 0; k < p.num_clusters(); ++k) {
        means.push_back(vector_json(p.means.row(k)));
        const auto& cov = p.covariances[static_cast<std::size_t>(k)];
        if (p.kind == CovarianceKind::Diagonal) {
            covariances.push_back(vector_json(cov.diagonal()));
        } else {
            json rows = json::array();
            for (Eigen::Index r = 0; r < cov.rows(); ++r) rows.push_back(vector_json(cov.row(r)));
            covariances.push_back(std::move(rows));
        }
    }
    return {{"schema_version", kModelSchemaVersion},
            {"covariance_kind", to_string(p.kind)},
            {"weights", vector_json(p.weights)},
            {"means", std::move(means)},
            {"covariances", std::move(covariances)},
            {"config", config_to_json(model.config)},
            {"log_likelihood", model.log_likelihood},
            {"iterations_run", model.iterations_run},
            {"converged", model.converged},
            {"best_restart_index", model.best_restart_index}};
}

FittedModel model_from_json(const nlohmann::json& doc) {
    if (field<int>(doc, "schema_version") != kModelSchemaVersion) {
        malformed("unsupported model schema_version");
    }
    FittedModel model;
    model.config = config_from_json(field<json>(doc, "config"));
    auto& p = model.params;
    p.kind = parse_covariance_kind(field<std::string>(doc, "covariance_kind"));

    const auto weights = field<std::vector<double>>(doc, "weights");
    const auto means = field<std::vector<std::vector<double>>>(doc, "means");
    const auto& covariances = field<json>(doc, "covariances");
    const auto m = static_cast<Eigen::Index>(weights.size());
    if (m < 1 || static_cast<Eigen::Index>(means.size()) != m || !covariances.is_array() ||
        static_cast<Eigen::Index>(covariances.size()) != m) {
        malformed("weights, means and covariances must describe the same components");
    }
    const auto d = static_cast<Eigen::Index>(means.front().size());
    p.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), m);
    p.means.resize(m, d);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& row = means[static_cast<std::size_t>(k)];
        if (static_cast<Eigen::Index>(row.size()) != d) malformed("means have inconsistent dimension");
        p.means.row(k) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), d);
        try {
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            const auto& entry = covariances[static_cast<std::size_t>(k)];
            if (p.kind == CovarianceKind::Diagonal) {
                const auto diag = entry.get<std::vector<double>>();
                if (static_cast<Eigen::Index>(diag.size()) != d) malformed("covariance has the wrong size");
                cov.diagonal() = Eigen::Map<const Eigen::VectorXd>(diag.data(), d);
            } else {
                const auto rows = entry.get<std::vector<std::vector<double>>>();
                if (static_cast<Eigen::Index>(rows.size()) != d) malformed("covariance has the wrong size");
                for (Eigen::Index r = 0; r < d; ++r) {
                    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != d) {
                        malformed("covariance has the wrong size");
                    }
                    cov.row(r) = Eigen::Map<const Eigen::RowVectorXd>(rows[static_cast<std::size_t>(r)].data(), d);
                }
            }
            p.covariances.push_back(std::move(cov));
        } catch (const json::exception&) {
            malformed("covariances have the wrong type");
        }
    }
    model.log_likelihood = field<double>(doc, "log_likelihood");
    model.iterations_run = field<int>(doc, "iterations_run");
    model.converged = field<bool>(doc, "converged");
    model.best_restart_index = doc.value("best_restart_index", 0);
    return model;
}

nlohmann::json sweep_to_json(const SweepResult<double>& sweep) {
    json entries = json::array();
    for (const auto& e : sweep.entries) {
        entries.push_back({{"M", e.num_clusters},
                           {"bic", e.bic},
                           {"aic", e.aic},
                           {"log_likelihood", e.fit.log_likelihood()},
                           {"converged", e.fit.converged}});
    }
    return {{"entries", std::move(entries)}, {"selected_M", sweep.selected_clusters}};
}

nlohmann::json quality_to_json(const QualityIndices& quality) {
    return {{"mean_silhouette", quality.mean_silhouette},
            {"davies_bouldin", quality.davies_bouldin ? finite_or_null(*quality.davies_bouldin) : json(nullptr)},
            {"cluster_sizes", quality.cluster_sizes},
            {"degenerate", quality.degenerate}};
}

nlohmann::json report_to_json(const EvaluationReport& report) {
    json clusters = json::array();
    for (const auto& c : report.clusters) {
        clusters.push_back({{"cluster_index", c.cluster_index},
                            {"canonical_rank", c.canonical_rank},
                            {"tier", to_string(c.tier)},
                            {"size", c.size},
                            {"overall_score", c.overall_score},
                            {"mean_ratings", vector_json(c.mean_ratings)}});
    }
    json offerings = json::array();
    for (const auto& r : report.offerings) {
        offerings.push_back({{"offering_id", r.offering_id},
                             {"record_count", r.record_count},
                             {"cluster_index", r.cluster_index},
                             {"canonical_rank", r.canonical_rank},
                             {"tier", to_string(r.tier)},
                             {"posterior", r.posterior},
                             {"mean_ratings", vector_json(r.mean_ratings)},
                             {"delta_vs_global_mean", vector_json(r.delta)}});
    }
    json features = json::array();
    for (auto col : kFeatureColumns) features.push_back(col);
    const auto& m = report.model;
    return {{"schema_version", EvaluationReport::kSchemaVersion},
            {"features", std::move(features)},
            {"dataset",
             {{"n", report.dataset.n},
              {"unit", to_string(report.dataset.unit)},
              {"records", report.dataset.record_count},
              {"offerings", report.dataset.offering_count}}},
            {"model",
             {{"selected_M", m.selected_clusters},
              {"log_likelihood", m.log_likelihood},
              {"bic", m.bic},
              {"aic", m.aic},
              {"iterations_run", m.iterations_run},
              {"converged", m.converged},
              {"mixture", model_to_json(report.mixture)}}},
            {"clusters", std::move(clusters)},
            {"offerings", std::move(offerings)},
            {"quality", quality_to_json(report.quality)}};
}

EvaluationReport report_from_json(const nlohmann::json& doc) {
    if (field<int>(doc, "schema_version") != EvaluationReport::kSchemaVersion) {
        malformed("unsupported report schema_version");
    }
    EvaluationReport report;
    const auto dataset = field<json>(doc, "dataset");
    report.dataset.n = field<int>(dataset, "n");
    report.dataset.unit = parse_unit(field<std::string>(dataset, "unit"));
    report.dataset.record_count = field<int>(dataset, "records");
    report.dataset.offering_count = field<int>(dataset, "offerings");

    const auto model = field<json>(doc, "model");
    report.model.selected_clusters = field<int>(model, "selected_M");
    report.model.log_likelihood = field<double>(model, "log_likelihood");
    report.model.bic = field<double>(model, "bic");
    report.model.aic = field<double>(model, "aic");
    report.model.iterations_run = field<int>(model, "iterations_run");
    report.model.converged = field<bool>(model, "converged");
    report.mixture = model_from_json(field<json>(model, "mixture"));

    for (const auto& c : field<json>(doc, "clusters")) {
        ClusterProfile p;
        p.cluster_index = field<int>(c, "cluster_index");
        p.canonical_rank = field<int>(c, "canonical_rank");
        p.tier = parse_tier(field<std::string>(c, "tier"));
        p.size = field<int>(c, "size");
        p.overall_score = field<double>(c, "overall_score");
        p.mean_ratings = rating_vector(c, "mean_ratings");
        report.clusters.push_back(p);
    }
    for (const auto& r : field<json>(doc, "offerings")) {
        OfferingRow row;
        row.offering_id = field<std::string>(r, "offering_id");
        row.record_count = field<int>(r, "record_count");
        row.cluster_index = field<int>(r, "cluster_index");
        row.canonical_rank = field<int>(r, "canonical_rank");
        row.tier = parse_tier(field<std::string>(r, "tier"));
        row.posterior = field<double>(r, "posterior");
        row.mean_ratings = rating_vector(r, "mean_ratings");
        row.delta = rating_vector(r, "delta_vs_global_mean");
        report.offerings.push_back(std::move(row));
    }

    const auto quality = field<json>(doc, "quality");
    report.quality.mean_silhouette = field<double>(quality, "mean_silhouette");
    if (quality.contains("davies_bouldin") && !quality.at("davies_bouldin").is_null()) {
        report.quality.davies_bouldin = field<double>(quality, "davies_bouldin");
    }
    report.quality.cluster_sizes = field<std::vector<int>>(quality, "cluster_sizes");
    report.quality.degenerate = field<bool>(quality, "degenerate");
    return report;
}

nlohmann::json recommendations_to_json(const std::vector<Recommendation>& recommendations) {
    json out = json::array();
    for (const auto& r : recommendations) {
        out.push_back({{"rank", r.rank},
                       {"offering_id", r.offering_id},
                       {"score", r.score},
                       {"tier", to_string(r.tier)},
                       {"cluster_index", r.cluster_index}});
    }
    return out;
}

std::string dump_document(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

nlohmann::json parse_document(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        malformed(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace saasqual
