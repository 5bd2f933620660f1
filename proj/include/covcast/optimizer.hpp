#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace covcast {

/// Column means of a returns window.
Eigen::VectorXd mean_historical_returns(const Eigen::MatrixXd& window);

/// Euclidean projection onto {w : w >= 0, Σ w = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct MinVarianceOptions {
    double cost_rate = 0.0;        ///< L1 turnover penalty, used only with prev weights
    std::size_t max_iter = 10000;
    std::size_t patience = 50;     ///< stalled iterations before stopping
    double tolerance = 1e-12;      ///< minimum improvement of the normalized objective
};

struct MinVarianceResult {
    Eigen::VectorXd weights;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// wᵀΣw + cost_rate·Σ|w - prev|.
double min_variance_objective(const Eigen::MatrixXd& cov, const Eigen::VectorXd& weights,
                              const std::optional<Eigen::VectorXd>& prev, double cost_rate);

/// Long-only minimum variance by projected (sub)gradient descent with steps
/// η_k = 1 / (L √(1 + k/100)), L the gradient Lipschitz constant of the
/// normalized problem. Starts from the better of uniform and `prev` and
/// returns the best point visited.
MinVarianceResult min_variance(const Eigen::MatrixXd& cov,
                               const std::optional<Eigen::VectorXd>& prev = std::nullopt,
                               const MinVarianceOptions& options = {});

} // namespace covcast
