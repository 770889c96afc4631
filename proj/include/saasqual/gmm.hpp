#ifndef SAASQUAL_GMM_HPP
#define SAASQUAL_GMM_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "saasqual/error.hpp"
#include "saasqual/random.hpp"

/**
 * @file gmm.hpp
 * @brief Gaussian mixture fitting by expectation-maximization.
 *
 * Data is an n x d matrix with one observation per row. Everything here is
 * templated on the scalar type; the rest of the library uses double.
 */

namespace saasqual {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class CovarianceKind { Diagonal, Full };

inline std::string_view to_string(CovarianceKind kind) {
    return kind == CovarianceKind::Diagonal ? "diagonal" : "full";
}

inline CovarianceKind parse_covariance_kind(std::string_view text) {
    if (text == "diagonal" || text == "diag") return CovarianceKind::Diagonal;
    if (text == "full") return CovarianceKind::Full;
    throw Error(ErrorKind::InvalidConfig, "covariance kind must be 'diag' or 'full'");
}

struct FitConfig {
    int num_clusters = 1;
    /// Relative log-likelihood change at which a run counts as converged.
    double tolerance = 1e-6;
    int max_iterations = 500;
    std::uint64_t seed = 0;
    CovarianceKind covariance_kind = CovarianceKind::Diagonal;
    int restarts = 8;
    /// Lower bound on every variance / covariance eigenvalue (rating units squared).
    double variance_floor = 1e-4;
    /// Worker threads for restarts. Results do not depend on this.
    int threads = 1;

    void validate() const {
        if (num_clusters < 1) throw Error(ErrorKind::InvalidConfig, "number of clusters must be >= 1");
        if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidConfig, "tolerance must be > 0");
        if (max_iterations < 1) throw Error(ErrorKind::InvalidConfig, "max iterations must be >= 1");
        if (restarts < 1) throw Error(ErrorKind::InvalidConfig, "restarts must be >= 1");
        if (!(variance_floor > 0.0)) throw Error(ErrorKind::InvalidConfig, "variance floor must be > 0");
        if (threads < 1) throw Error(ErrorKind::InvalidConfig, "threads must be >= 1");
    }
};

/// Mixture weights, component means (one per row) and covariances.
template <typename Scalar>
struct MixtureParams {
    CovarianceKind kind = CovarianceKind::Diagonal;
    VectorX<Scalar> weights;
    MatrixX<Scalar> means;
    std::vector<MatrixX<Scalar>> covariances;

    Eigen::Index num_clusters() const { return weights.size(); }
    Eigen::Index dimension() const { return means.cols(); }
};

template <typename Scalar>
struct EStepResult {
    /// n x M posterior membership probabilities, rows sum to one.
    MatrixX<Scalar> responsibilities;
    /// log p(x_i) under the mixture.
    VectorX<Scalar> point_log_likelihood;
    Scalar log_likelihood = 0;
};

template <typename Scalar>
struct FitResult {
    MixtureParams<Scalar> params;
    MatrixX<Scalar> responsibilities;
    std::vector<Scalar> log_likelihood_trace;
    int iterations_run = 0;
    bool converged = false;
    int best_restart_index = 0;

    Scalar log_likelihood() const { return log_likelihood_trace.back(); }
};

/**
 * Log density of a multivariate normal, with the Cholesky factor computed
 * once so the same component can be evaluated at many points.
 */
template <typename Scalar>
class GaussianLogDensity {
public:
    GaussianLogDensity(const VectorX<Scalar>& mean, const MatrixX<Scalar>& covariance)
        : mean_(mean), llt_(covariance) {
        const auto d = mean.size();
        if (covariance.rows() != d || covariance.cols() != d) {
            throw Error(ErrorKind::DimensionMismatch, "covariance does not match mean dimension");
        }
        if (llt_.info() != Eigen::Success) {
            throw Error(ErrorKind::SingularCovariance, "covariance is not positive definite");
        }
        Scalar log_det = 0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const Scalar l = llt_.matrixL()(j, j);
            if (!(l > Scalar(0)) || !std::isfinite(static_cast<double>(l))) {
                throw Error(ErrorKind::SingularCovariance, "covariance is not positive definite");
            }
            log_det += 2 * std::log(l);
        }
        using std::log;
        log_norm_ = Scalar(-0.5) * (Scalar(d) * log(Scalar(2) * std::numbers::pi_v<Scalar>) + log_det);
    }

    template <typename Derived>
    Scalar operator()(const Eigen::MatrixBase<Derived>& point) const {
        const VectorX<Scalar> diff = point.transpose().template cast<Scalar>() - mean_;
        const VectorX<Scalar> z = llt_.matrixL().solve(diff);
        return log_norm_ - Scalar(0.5) * z.squaredNorm();
    }

private:
    VectorX<Scalar> mean_;
    Eigen::LLT<MatrixX<Scalar>> llt_;
    Scalar log_norm_;
};

/// log N(point | mean, covariance). Throws SingularCovariance when the
/// covariance is not positive definite.
template <typename DerivedP, typename DerivedM, typename DerivedC>
typename DerivedP::Scalar gaussian_log_density(const Eigen::MatrixBase<DerivedP>& point,
                                               const Eigen::MatrixBase<DerivedM>& mean,
                                               const Eigen::MatrixBase<DerivedC>& covariance) {
    using Scalar = typename DerivedP::Scalar;
    if (point.size() != mean.size()) {
        throw Error(ErrorKind::DimensionMismatch, "point and mean differ in dimension");
    }
    const VectorX<Scalar> m = mean.reshaped();
    const GaussianLogDensity<Scalar> density(m, covariance.eval());
    return density(point.reshaped().transpose());
}

namespace detail {

template <typename Scalar>
void check_params(const MixtureParams<Scalar>& params) {
    const auto m = params.num_clusters();
    if (m < 1 || params.means.rows() != m || static_cast<Eigen::Index>(params.covariances.size()) != m) {
        throw Error(ErrorKind::DimensionMismatch, "mixture parameters are inconsistent");
    }
}

/// Per-dimension variance of the data about its centroid (n-1 denominator),
/// clamped to the floor.
template <typename Derived>
VectorX<typename Derived::Scalar> floored_column_variance(const Eigen::MatrixBase<Derived>& data,
                                                           double floor) {
    using Scalar = typename Derived::Scalar;
    const auto n = data.rows();
    VectorX<Scalar> var = VectorX<Scalar>::Zero(data.cols());
    if (n > 1) {
        const auto centroid = data.colwise().mean().eval();
        var = (data.rowwise() - centroid).array().square().colwise().sum().transpose() / Scalar(n - 1);
    }
    return var.cwiseMax(Scalar(floor));
}

/// Projects a scatter matrix onto the allowed covariance family and applies
/// the variance floor (eigenvalue clamping in the full case).
template <typename Scalar>
MatrixX<Scalar> regularize_covariance(MatrixX<Scalar> scatter, CovarianceKind kind, double floor) {
    const Scalar lo(floor);
    if (kind == CovarianceKind::Diagonal) {
        return scatter.diagonal().cwiseMax(lo).asDiagonal();
    }
    scatter = (Scalar(0.5) * (scatter + scatter.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(scatter);
    if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= lo) {
        return scatter;
    }
    MatrixX<Scalar> clamped = eig.eigenvectors() * eig.eigenvalues().cwiseMax(lo).asDiagonal() *
                              eig.eigenvectors().transpose();
    return Scalar(0.5) * (clamped + clamped.transpose());
}

}  // namespace detail

/**
 * E-step: posterior responsibilities and the total log-likelihood.
 *
 * Each row is normalized with log-sum-exp, so well-separated components do
 * not underflow.
 */
template <typename Derived>
EStepResult<typename Derived::Scalar> e_step(const Eigen::MatrixBase<Derived>& data,
                                             const MixtureParams<typename Derived::Scalar>& params) {
    using Scalar = typename Derived::Scalar;
    detail::check_params(params);
    if (params.dimension() != data.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "mixture dimension " + std::to_string(params.dimension()) +
                                                      " does not match data dimension " +
                                                      std::to_string(data.cols()));
    }
    const auto n = data.rows();
    const auto m = params.num_clusters();

    std::vector<GaussianLogDensity<Scalar>> components;
    components.reserve(static_cast<std::size_t>(m));
    VectorX<Scalar> log_weights(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        components.emplace_back(params.means.row(k).transpose(), params.covariances[k]);
        log_weights[k] = params.weights[k] > Scalar(0) ? Scalar(std::log(params.weights[k]))
                                                       : -std::numeric_limits<Scalar>::infinity();
    }

    EStepResult<Scalar> out;
    out.responsibilities.resize(n, m);
    out.point_log_likelihood.resize(n);
    VectorX<Scalar> joint(m);
    Scalar total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < m; ++k) {
            joint[k] = log_weights[k] + components[static_cast<std::size_t>(k)](data.row(i));
        }
        const Scalar peak = joint.maxCoeff();
        Scalar sum = 0;
        for (Eigen::Index k = 0; k < m; ++k) {
            joint[k] = std::exp(joint[k] - peak);
            sum += joint[k];
        }
        const Scalar lse = peak + std::log(sum);
        for (Eigen::Index k = 0; k < m; ++k) {
            out.responsibilities(i, k) = joint[k] / sum;
        }
        out.point_log_likelihood[i] = lse;
        total += lse;
    }
    out.log_likelihood = total;
    return out;
}

/**
 * M-step: re-estimate weights, means and covariances from responsibilities.
 *
 * A component whose effective count falls below 1e-8 * n is re-seeded at the
 * point with the lowest log-likelihood under the current mixture (or, when
 * `point_log_likelihood` is not supplied, the point farthest from the data
 * centroid) with weight 1/n and the floored global variance. Weights are
 * renormalized afterwards.
 */
template <typename Derived, typename DerivedG>
MixtureParams<typename Derived::Scalar> m_step(
    const Eigen::MatrixBase<Derived>& data, const Eigen::MatrixBase<DerivedG>& gamma, const FitConfig& config,
    const VectorX<typename Derived::Scalar>* point_log_likelihood = nullptr) {
    using Scalar = typename Derived::Scalar;
    const auto n = data.rows();
    const auto d = data.cols();
    const auto m = gamma.cols();
    if (n < 1) {
        throw Error(ErrorKind::TooFewPoints, "m-step needs at least one point");
    }
    if (gamma.rows() != n || m < 1) {
        throw Error(ErrorKind::DimensionMismatch, "responsibilities do not match the data");
    }
    if (point_log_likelihood != nullptr && point_log_likelihood->size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "per-point log-likelihoods do not match the data");
    }

    MixtureParams<Scalar> params;
    params.kind = config.covariance_kind;
    params.weights.resize(m);
    params.means.resize(m, d);
    params.covariances.resize(static_cast<std::size_t>(m));

    const VectorX<Scalar> counts = gamma.colwise().sum().transpose();
    const Scalar empty_threshold = Scalar(1e-8) * Scalar(n);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (counts[k] < empty_threshold) {
            Eigen::Index seed_row = 0;
            if (point_log_likelihood != nullptr) {
                point_log_likelihood->minCoeff(&seed_row);
            } else {
                const auto centroid = data.colwise().mean().eval();
                (data.rowwise() - centroid).rowwise().squaredNorm().maxCoeff(&seed_row);
            }
            params.means.row(k) = data.row(seed_row);
            params.weights[k] = Scalar(1) / Scalar(n);
            params.covariances[static_cast<std::size_t>(k)] =
                detail::floored_column_variance(data, config.variance_floor).asDiagonal();
            continue;
        }
        const auto w = gamma.col(k);
        const VectorX<Scalar> mean = (data.transpose() * w) / counts[k];
        const MatrixX<Scalar> centered = data.rowwise() - mean.transpose();
        MatrixX<Scalar> scatter = centered.transpose() * w.asDiagonal() * centered / counts[k];
        params.weights[k] = counts[k] / Scalar(n);
        params.means.row(k) = mean.transpose();
        params.covariances[static_cast<std::size_t>(k)] =
            detail::regularize_covariance<Scalar>(std::move(scatter), config.covariance_kind,
                                                  config.variance_floor);
    }
    params.weights /= params.weights.sum();
    return params;
}

/**
 * Initial parameters: k-means++ style seeding of the means (first mean a
 * uniformly drawn point, each further mean drawn with probability
 * proportional to squared distance from the nearest chosen mean), uniform
 * weights, diagonal covariances from the floored per-dimension variance of
 * the whole data set. With a single component the mean is the centroid.
 */
template <typename Derived>
MixtureParams<typename Derived::Scalar> init_params(const Eigen::MatrixBase<Derived>& data, int num_clusters,
                                                    std::uint64_t seed, double variance_floor = 1e-4,
                                                    CovarianceKind kind = CovarianceKind::Diagonal) {
    using Scalar = typename Derived::Scalar;
    const auto n = data.rows();
    if (num_clusters < 1) {
        throw Error(ErrorKind::InvalidConfig, "number of clusters must be >= 1");
    }
    if (n < num_clusters) {
        throw Error(ErrorKind::TooFewPoints, std::to_string(n) + " points cannot seed " +
                                                 std::to_string(num_clusters) + " clusters");
    }
    const Eigen::Index m = num_clusters;

    MixtureParams<Scalar> params;
    params.kind = kind;
    params.weights = VectorX<Scalar>::Constant(m, Scalar(1) / Scalar(m));
    params.means.resize(m, data.cols());
    const MatrixX<Scalar> cov = detail::floored_column_variance(data, variance_floor).asDiagonal();
    params.covariances.assign(static_cast<std::size_t>(m), cov);

    if (m == 1) {
        params.means.row(0) = data.colwise().mean();
        return params;
    }

    Rng rng(seed);
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    auto pick = [&](Eigen::Index k, Eigen::Index row) {
        params.means.row(k) = data.row(row);
        chosen[static_cast<std::size_t>(row)] = true;
    };
    pick(0, static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));

    VectorX<Scalar> nearest = (data.rowwise() - params.means.row(0)).rowwise().squaredNorm();
    for (Eigen::Index k = 1; k < m; ++k) {
        Scalar total = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!chosen[static_cast<std::size_t>(i)]) total += nearest[i];
        }
        Eigen::Index next = -1;
        if (total > Scalar(0)) {
            const Scalar target = Scalar(rng.uniform()) * total;
            Scalar running = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (chosen[static_cast<std::size_t>(i)] || !(nearest[i] > Scalar(0))) continue;
                running += nearest[i];
                next = i;
                if (running > target) break;
            }
        } else {
            // Remaining points all coincide with chosen means; pick uniformly among them.
            auto slot = rng.index(static_cast<std::uint64_t>(n - k));
            for (Eigen::Index i = 0; i < n; ++i) {
                if (chosen[static_cast<std::size_t>(i)]) continue;
                if (slot == 0) {
                    next = i;
                    break;
                }
                --slot;
            }
        }
        pick(k, next);
        nearest = nearest.cwiseMin((data.rowwise() - params.means.row(k)).rowwise().squaredNorm());
    }
    return params;
}

/// Relative change used as the stopping rule.
template <typename Scalar>
bool has_converged(Scalar previous, Scalar current, double tolerance) {
    using std::abs;
    return abs(current - previous) / std::max(Scalar(1), abs(current)) <= Scalar(tolerance);
}

/**
 * One EM run from the given starting point. Each iteration evaluates the
 * E-step (recording the log-likelihood of the current parameters), tests the
 * stopping rule, then applies the M-step. The returned parameters are the
 * ones whose log-likelihood closes the trace.
 */
template <typename Derived>
FitResult<typename Derived::Scalar> run_em(const Eigen::MatrixBase<Derived>& data,
                                           MixtureParams<typename Derived::Scalar> initial,
                                           const FitConfig& config) {
    using Scalar = typename Derived::Scalar;
    config.validate();
    FitResult<Scalar> result;
    result.params = std::move(initial);
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        auto estep = e_step(data, result.params);
        result.log_likelihood_trace.push_back(estep.log_likelihood);
        result.responsibilities = std::move(estep.responsibilities);
        result.iterations_run = iteration;
        const auto& trace = result.log_likelihood_trace;
        if (trace.size() >= 2 && has_converged(trace[trace.size() - 2], trace.back(), config.tolerance)) {
            result.converged = true;
            break;
        }
        if (iteration == config.max_iterations) {
            break;
        }
        result.params = m_step(data, result.responsibilities, config, &estep.point_log_likelihood);
    }
    return result;
}

/**
 * Multi-start EM. Restart r is seeded with config.seed + r; the run with the
 * highest final log-likelihood wins, ties going to the lowest restart index.
 * Restarts may run on several threads; each run is self-contained, so the
 * result is bit-identical to a sequential fit.
 */
template <typename Derived>
FitResult<typename Derived::Scalar> fit_em(const Eigen::MatrixBase<Derived>& data, const FitConfig& config) {
    using Scalar = typename Derived::Scalar;
    config.validate();
    if (data.rows() < config.num_clusters) {
        throw Error(ErrorKind::TooFewPoints, std::to_string(data.rows()) + " points cannot support " +
                                                 std::to_string(config.num_clusters) + " clusters");
    }
    const auto restarts = static_cast<std::size_t>(config.restarts);
    std::vector<std::optional<FitResult<Scalar>>> runs(restarts);
    std::vector<std::exception_ptr> failures(restarts);

    auto run_one = [&](std::size_t r) {
        try {
            auto init = init_params(data, config.num_clusters, config.seed + r, config.variance_floor,
                                    config.covariance_kind);
            runs[r] = run_em(data, std::move(init), config);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), restarts);
    if (workers <= 1) {
        for (std::size_t r = 0; r < restarts; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (auto r = next.fetch_add(1); r < restarts; r = next.fetch_add(1)) run_one(r);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
        if (runs[r]->log_likelihood() > runs[best]->log_likelihood()) best = r;
    }
    FitResult<Scalar> result = std::move(*runs[best]);
    result.best_restart_index = static_cast<int>(best);
    return result;
}

template <typename Scalar>
struct Prediction {
    int cluster_index = 0;
    VectorX<Scalar> posterior;
};

/// Posterior membership of a single point; ties resolve to the lowest index.
template <typename Derived>
Prediction<typename Derived::Scalar> predict(const MixtureParams<typename Derived::Scalar>& params,
                                             const Eigen::MatrixBase<Derived>& point) {
    using Scalar = typename Derived::Scalar;
    if (point.size() != params.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "point dimension does not match the mixture");
    }
    const MatrixX<Scalar> row = point.reshaped().transpose();
    auto estep = e_step(row, params);
    Prediction<Scalar> out;
    out.posterior = estep.responsibilities.row(0).transpose();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < out.posterior.size(); ++k) {
        if (out.posterior[k] > out.posterior[best]) best = k;
    }
    out.cluster_index = static_cast<int>(best);
    return out;
}

}  // namespace saasqual

#endif
