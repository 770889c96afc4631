#ifndef SAASQUAL_FEATURES_HPP
#define SAASQUAL_FEATURES_HPP

#include <array>
#include <cstddef>
#include <string_view>

#include <Eigen/Core>

namespace saasqual {

/// The six SaaS key features, in canonical order.
enum class FeatureKey : int {
    Reusability = 0,
    Availability,
    Scalability,
    PayPerUse,
    Customizability,
    DataManagedByProviders,
};

inline constexpr int kFeatureCount = 6;

inline constexpr std::array<FeatureKey, kFeatureCount> kFeatures = {
    FeatureKey::Reusability,     FeatureKey::Availability, FeatureKey::Scalability,
    FeatureKey::PayPerUse,       FeatureKey::Customizability,
    FeatureKey::DataManagedByProviders,
};

/// Column names used by the feedback CSV, same order as kFeatures.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureColumns = {
    "reusability",     "availability",   "scalability",
    "pay_per_use",     "customizability", "data_managed_by_providers",
};

inline constexpr std::string_view column_name(FeatureKey key) {
    return kFeatureColumns[static_cast<std::size_t>(key)];
}

inline constexpr double kRatingMin = 1.0;
inline constexpr double kRatingMax = 10.0;

/// Six ratings indexed by FeatureKey. Range is validated where ratings enter
/// the system (CSV parsing, synthetic generation), not by the type.
using RatingVector = Eigen::Matrix<double, kFeatureCount, 1>;

template <typename Derived>
bool within_rating_scale(const Eigen::MatrixBase<Derived>& values) {
    return (values.array() >= kRatingMin).all() && (values.array() <= kRatingMax).all();
}

}  // namespace saasqual

#endif
