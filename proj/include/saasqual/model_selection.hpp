#ifndef SAASQUAL_MODEL_SELECTION_HPP
#define SAASQUAL_MODEL_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "saasqual/gmm.hpp"

namespace saasqual {

/// Free parameters of an M-component mixture in d dimensions.
inline std::int64_t param_count(int num_clusters, int dimension, CovarianceKind kind) {
    const std::int64_t m = num_clusters;
    const std::int64_t d = dimension;
    const std::int64_t per_covariance = kind == CovarianceKind::Diagonal ? d : d * (d + 1) / 2;
    return (m - 1) + m * d + m * per_covariance;
}

inline double bic(double log_likelihood, int num_clusters, int dimension, CovarianceKind kind,
                  std::int64_t n) {
    return -2.0 * log_likelihood +
           static_cast<double>(param_count(num_clusters, dimension, kind)) * std::log(static_cast<double>(n));
}

inline double aic(double log_likelihood, int num_clusters, int dimension, CovarianceKind kind) {
    return -2.0 * log_likelihood + 2.0 * static_cast<double>(param_count(num_clusters, dimension, kind));
}

struct SweepConfig {
    int k_min = 1;
    /// Clamped to n - 1 at run time.
    int k_max = 10;
    /// Applied to every fit with num_clusters overridden.
    FitConfig base;
};

template <typename Scalar>
struct SweepEntry {
    int num_clusters = 0;
    FitResult<Scalar> fit;
    double bic = 0.0;
    double aic = 0.0;
};

template <typename Scalar>
struct SweepResult {
    std::vector<SweepEntry<Scalar>> entries;
    int selected_clusters = 0;

    const SweepEntry<Scalar>& selected() const {
        return entries[static_cast<std::size_t>(selected_clusters - entries.front().num_clusters)];
    }
};

/**
 * Fits every cluster count in [k_min, min(k_max, n - 1)] and selects the one
 * with the lowest BIC (ties go to the smaller count). Each count uses the
 * base seed, so a sweep is reproducible entry by entry.
 */
template <typename Derived>
SweepResult<typename Derived::Scalar> sweep_k(const Eigen::MatrixBase<Derived>& data, const SweepConfig& sweep) {
    using Scalar = typename Derived::Scalar;
    const auto n = data.rows();
    if (n < 2) {
        throw Error(ErrorKind::TooFewPoints, "a cluster-count sweep needs at least two points");
    }
    if (sweep.k_min < 1 || sweep.k_min > sweep.k_max) {
        throw Error(ErrorKind::InvalidRange, "cluster range must satisfy 1 <= k_min <= k_max");
    }
    const int k_max = static_cast<int>(std::min<Eigen::Index>(sweep.k_max, n - 1));
    if (sweep.k_min > k_max) {
        throw Error(ErrorKind::InvalidRange, "k_min " + std::to_string(sweep.k_min) +
                                                 " exceeds n - 1 = " + std::to_string(n - 1));
    }

    SweepResult<Scalar> result;
    for (int m = sweep.k_min; m <= k_max; ++m) {
        FitConfig config = sweep.base;
        config.num_clusters = m;
        SweepEntry<Scalar> entry;
        entry.num_clusters = m;
        entry.fit = fit_em(data, config);
        const double ll = static_cast<double>(entry.fit.log_likelihood());
        const int d = static_cast<int>(data.cols());
        entry.bic = bic(ll, m, d, config.covariance_kind, n);
        entry.aic = aic(ll, m, d, config.covariance_kind);
        result.entries.push_back(std::move(entry));
    }
    const auto best = std::min_element(result.entries.begin(), result.entries.end(),
                                       [](const auto& a, const auto& b) { return a.bic < b.bic; });
    result.selected_clusters = best->num_clusters;
    return result;
}

}  // namespace saasqual

#endif
