#ifndef SAASQUAL_CLUSTER_QUALITY_HPP
#define SAASQUAL_CLUSTER_QUALITY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "saasqual/error.hpp"

namespace saasqual {

struct HardAssignment {
    std::vector<int> labels;
    int num_clusters = 0;

    std::vector<int> cluster_sizes() const {
        std::vector<int> sizes(static_cast<std::size_t>(num_clusters), 0);
        for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
        return sizes;
    }
};

/// Row-wise argmax of a responsibility matrix, ties to the lowest index.
template <typename Derived>
HardAssignment hard_assign(const Eigen::MatrixBase<Derived>& gamma) {
    HardAssignment out;
    out.num_clusters = static_cast<int>(gamma.cols());
    out.labels.resize(static_cast<std::size_t>(gamma.rows()));
    for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < gamma.cols(); ++k) {
            if (gamma(i, k) > gamma(i, best)) best = k;
        }
        out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

struct SilhouetteResult {
    std::vector<double> per_point;
    double mean = 0.0;
    /// Fewer than two nonempty clusters; every value is zero.
    bool degenerate = false;
};

namespace detail {

inline void check_labels(Eigen::Index n, const HardAssignment& assignment) {
    if (static_cast<Eigen::Index>(assignment.labels.size()) != n) {
        throw Error(ErrorKind::LengthMismatch, "labels do not match the number of data rows");
    }
    for (int l : assignment.labels) {
        if (l < 0 || l >= assignment.num_clusters) {
            throw Error(ErrorKind::InvalidConfig, "label outside [0, num_clusters)");
        }
    }
}

}  // namespace detail

/**
 * Exact silhouette with Euclidean distance. Points in singleton clusters
 * score 0, and s(i) = 0 whenever max(a, b) = 0.
 */
template <typename Derived>
SilhouetteResult silhouette(const Eigen::MatrixBase<Derived>& data, const HardAssignment& assignment) {
    const auto n = data.rows();
    if (n < 2) {
        throw Error(ErrorKind::TooFewPoints, "silhouette needs at least two points");
    }
    detail::check_labels(n, assignment);
    const auto sizes = assignment.cluster_sizes();
    const auto m = static_cast<std::size_t>(assignment.num_clusters);
    const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; });

    SilhouetteResult out;
    out.per_point.assign(static_cast<std::size_t>(n), 0.0);
    out.degenerate = nonempty < 2;
    if (out.degenerate) {
        return out;
    }

    std::vector<double> distance_sum(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignment.labels[static_cast<std::size_t>(i)]);
        if (sizes[own] == 1) continue;
        std::fill(distance_sum.begin(), distance_sum.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto lj = static_cast<std::size_t>(assignment.labels[static_cast<std::size_t>(j)]);
            distance_sum[lj] += static_cast<double>((data.row(i) - data.row(j)).norm());
        }
        const double a = distance_sum[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k) {
            if (k == own || sizes[k] == 0) continue;
            b = std::min(b, distance_sum[k] / static_cast<double>(sizes[k]));
        }
        const double scale = std::max(a, b);
        out.per_point[static_cast<std::size_t>(i)] = scale > 0.0 ? (b - a) / scale : 0.0;
    }
    double total = 0.0;
    for (double s : out.per_point) total += s;
    out.mean = total / static_cast<double>(n);
    return out;
}

/// Davies-Bouldin index. Needs at least two clusters, all nonempty, with
/// distinct centroids.
template <typename Derived>
double davies_bouldin(const Eigen::MatrixBase<Derived>& data, const HardAssignment& assignment) {
    detail::check_labels(data.rows(), assignment);
    const auto m = assignment.num_clusters;
    if (m < 2) {
        throw Error(ErrorKind::UndefinedForSingleCluster, "Davies-Bouldin needs at least two clusters");
    }
    const auto sizes = assignment.cluster_sizes();
    for (int k = 0; k < m; ++k) {
        if (sizes[static_cast<std::size_t>(k)] == 0) {
            throw Error(ErrorKind::EmptyCluster, "cluster " + std::to_string(k) + " is empty");
        }
    }

    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(m, data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        centroids.row(assignment.labels[static_cast<std::size_t>(i)]) += data.row(i).template cast<double>();
    }
    for (int k = 0; k < m; ++k) {
        centroids.row(k) /= static_cast<double>(sizes[static_cast<std::size_t>(k)]);
    }
    Eigen::VectorXd scatter = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const int k = assignment.labels[static_cast<std::size_t>(i)];
        scatter[k] += (data.row(i).template cast<double>() - centroids.row(k)).norm();
    }
    for (int k = 0; k < m; ++k) {
        scatter[k] /= static_cast<double>(sizes[static_cast<std::size_t>(k)]);
    }

    double total = 0.0;
    for (int k = 0; k < m; ++k) {
        double worst = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == k) continue;
            const double separation = (centroids.row(k) - centroids.row(j)).norm();
            if (separation == 0.0) {
                throw Error(ErrorKind::CoincidentCentroids,
                            "clusters " + std::to_string(k) + " and " + std::to_string(j) + " share a centroid");
            }
            worst = std::max(worst, (scatter[k] + scatter[j]) / separation);
        }
        total += worst;
    }
    return total / static_cast<double>(m);
}

/// Adjusted Rand index from the pair-counting contingency table.
double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

/// Summary of a hard clustering.
struct QualityIndices {
    double mean_silhouette = 0.0;
    std::vector<double> per_point_silhouette;
    /// Empty when undefined (single cluster, empty cluster, coincident centroids).
    std::optional<double> davies_bouldin;
    std::vector<int> cluster_sizes;
    bool degenerate = false;
};

template <typename Derived>
QualityIndices quality_indices(const Eigen::MatrixBase<Derived>& data, const HardAssignment& assignment) {
    QualityIndices out;
    out.cluster_sizes = assignment.cluster_sizes();
    if (data.rows() < 2) {
        detail::check_labels(data.rows(), assignment);
        out.per_point_silhouette.assign(static_cast<std::size_t>(data.rows()), 0.0);
        out.degenerate = true;
        return out;
    }
    auto sil = silhouette(data, assignment);
    out.mean_silhouette = sil.mean;
    out.per_point_silhouette = std::move(sil.per_point);
    out.degenerate = sil.degenerate;
    try {
        out.davies_bouldin = davies_bouldin(data, assignment);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::UndefinedForSingleCluster && e.kind() != ErrorKind::EmptyCluster &&
            e.kind() != ErrorKind::CoincidentCentroids) {
            throw;
        }
    }
    return out;
}

}  // namespace saasqual

#endif
