/**
 * @file estimators.hpp
 * @brief Classical covariance estimators
 *
 * All functions take a window of returns laid out observations x assets and
 * return an N x N covariance matrix in squared-return units.
 *
 *   Sample          (1/(k-1)) Σ (r - r̄)(r - r̄)'
 *   SemiCov         (1/k) Σ min(r - B, 0) min(r - B, 0)'
 *   Ewma            Σ_t = λ Σ_{t-1} + (1 - λ)(r_t - μ)(r_t - μ)'
 *   Shrink*         δ F + (1 - δ) S for three structured targets F
 *   OracleApprox    iterated shrinkage towards (tr(S)/p) I
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace covcast {

enum class EstimatorKind {
    Sample,
    SemiCov,
    Ewma,
    ShrinkConstVar,
    ShrinkSingleFactor,
    ShrinkConstCorr,
    OracleApprox,
};

EstimatorKind parse_estimator_kind(const std::string& name);
const char* to_string(EstimatorKind kind);

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::Sample;
    std::size_t window = 30;  ///< observations k
    double decay = 0.94;      ///< λ, Ewma only
    double threshold = 0.02;  ///< B, SemiCov only

    /// Throws std::invalid_argument on k < 2 or λ outside (0, 1).
    void validate() const;
};

enum class ShrinkTarget { ConstVar, SingleFactor, ConstCorr };

/// Unbiased sample covariance over all rows of `window`.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& window);

/// Downside semi-covariance over all rows, divisor k.
Eigen::MatrixXd semi_cov(const Eigen::MatrixXd& window, double threshold = 0.02);

/// EWMA recursion seeded with the sample covariance of the first `seed_window`
/// rows. μ is the mean of those rows and stays fixed for the remaining updates.
Eigen::MatrixXd ewma_cov(const Eigen::MatrixXd& history, double decay, std::size_t seed_window);

/// Structured target F built from S (and the window for the market factor).
Eigen::MatrixXd shrinkage_target(const Eigen::MatrixXd& sample, ShrinkTarget target,
                                 const Eigen::MatrixXd& window);

/// Ledoit-Wolf asymptotically optimal intensity for `target`, clipped to [0, 1].
double ledoit_wolf_intensity(ShrinkTarget target, const Eigen::MatrixXd& window);

/// δ F + (1 - δ) S. With no δ the Ledoit-Wolf intensity is estimated from `window`.
Eigen::MatrixXd shrink(const Eigen::MatrixXd& sample, ShrinkTarget target,
                       const Eigen::MatrixXd& window, std::optional<double> delta = std::nullopt);

struct OracleApproxResult {
    Eigen::MatrixXd cov;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

OracleApproxResult oracle_approx(const Eigen::MatrixXd& sample, std::size_t n,
                                 std::size_t max_iter = 100, double tol = 1e-8);

/// Rows of history the estimator consumes (trailing). Ewma uses twice the
/// window: the first half seeds the recursion.
std::size_t required_history(const EstimatorSpec& spec);

/// Runs the estimator on the trailing rows of `history` and repairs tiny
/// negative eigenvalues.
Eigen::MatrixXd estimate(const EstimatorSpec& spec, const Eigen::MatrixXd& history);

/// Smallest eigenvalue divided by the largest absolute eigenvalue (0 for a
/// zero matrix).
double min_eigen_ratio(const Eigen::MatrixXd& cov);

bool is_symmetric(const Eigen::MatrixXd& cov, double rel_tol = 1e-12);

/// Adds (|λ_min| + 1e-12) I when λ_min < -1e-10 λ_max; symmetrizes.
Eigen::MatrixXd repair_psd(Eigen::MatrixXd cov);

} // namespace covcast
