#pragma once

#include <Eigen/Dense>

#include "covcast/rng.hpp"

namespace covcast {

/// Negative log-likelihood of z under N(μ, Σ) and its gradients.
struct GaussianNll {
    double value = 0.0;
    Eigen::VectorXd d_mean;
    Eigen::VectorXd d_variance; ///< w.r.t. the diagonal variances
    Eigen::MatrixXd d_factor;   ///< w.r.t. the low-rank factor
};

/// Σ = diag(variance).
GaussianNll diagonal_gaussian_nll(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                                  const Eigen::VectorXd& variance);

/// Σ = diag(variance) + F Fᵀ with F of shape M x r (r may be 0). Uses the
/// Woodbury identity and the matrix determinant lemma, O(M r²).
GaussianNll lowrank_gaussian_nll(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                                 const Eigen::VectorXd& variance, const Eigen::MatrixXd& factor);

/// One draw from N(μ, diag(variance) + F Fᵀ).
Eigen::VectorXd sample_lowrank_gaussian(const Eigen::VectorXd& mean,
                                        const Eigen::VectorXd& variance,
                                        const Eigen::MatrixXd& factor, Rng& rng);

} // namespace covcast
