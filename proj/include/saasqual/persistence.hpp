#ifndef SAASQUAL_PERSISTENCE_HPP
#define SAASQUAL_PERSISTENCE_HPP

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "saasqual/evaluation.hpp"
#include "saasqual/model_selection.hpp"

/**
 * @file persistence.hpp
 * @brief JSON documents: fitted models, sweep summaries, quality fragments,
 * evaluation reports and recommendation lists.
 *
 * Doubles are written in shortest round-trip form, so reading a document back
 * reproduces every number bit for bit. Diagonal covariances are stored as
 * their diagonals.
 */

namespace saasqual {

inline constexpr int kModelSchemaVersion = 1;

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

nlohmann::json sweep_to_json(const SweepResult<double>& sweep);
nlohmann::json quality_to_json(const QualityIndices& quality);

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& doc);

nlohmann::json recommendations_to_json(const std::vector<Recommendation>& recommendations);

/// Pretty-printed with a trailing newline. Identical documents give identical text.
std::string dump_document(const nlohmann::json& doc);

/// Parses text, mapping syntax errors to Error(MalformedDocument).
nlohmann::json parse_document(std::string_view text);

}  // namespace saasqual

#endif
