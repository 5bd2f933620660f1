#include "covcast/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "covcast/errors.hpp"

namespace covcast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd mean_historical_returns(const MatrixXd& window)
{
    if (window.rows() < 1) {
        throw std::invalid_argument("mean_historical_returns: empty window");
    }
    return window.colwise().mean().transpose();
}

VectorXd project_to_simplex(const VectorXd& v)
{
    const Index n = v.size();
    if (n == 0) {
        throw std::invalid_argument("project_to_simplex: empty vector");
    }
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Index j = 0; j < n; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).max(0.0).matrix();
}

double min_variance_objective(const MatrixXd& cov, const VectorXd& weights,
                              const std::optional<VectorXd>& prev, double cost_rate)
{
    double value = weights.dot(cov * weights);
    if (prev && cost_rate > 0.0) {
        value += cost_rate * (weights - *prev).cwiseAbs().sum();
    }
    return value;
}

MinVarianceResult min_variance(const MatrixXd& cov, const std::optional<VectorXd>& prev,
                               const MinVarianceOptions& options)
{
    const Index n = cov.rows();
    if (n < 1 || cov.cols() != n) {
        throw std::invalid_argument("min_variance: covariance must be square and non-empty");
    }
    if (!cov.allFinite()) {
        throw RunError("min_variance: non-finite covariance");
    }
    if (prev && prev->size() != n) {
        throw std::invalid_argument("min_variance: previous weights have the wrong length");
    }
    if (!(options.cost_rate >= 0.0)) {
        throw std::invalid_argument("min_variance: cost rate must be non-negative");
    }
    const double cost = prev ? options.cost_rate : 0.0;

    // Work on Σ / s; the minimizer is unchanged when the cost scales along.
    double s = cov.diagonal().cwiseAbs().maxCoeff();
    if (!(s > 0.0)) {
        s = 1.0;
    }
    const MatrixXd q = 0.5 * (cov + cov.transpose()) / s;
    const double c = cost / s;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    double lipschitz = 2.0 * eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lipschitz > 0.0)) {
        lipschitz = 1.0;
    }
    const auto objective = [&](const VectorXd& w) {
        return min_variance_objective(q, w, prev, c);
    };

    VectorXd w = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double best_value = objective(w);
    if (prev && std::abs(prev->sum() - 1.0) <= 1e-9 && prev->minCoeff() >= 0.0) {
        const double at_prev = objective(*prev);
        if (at_prev < best_value) {
            w = *prev;
            best_value = at_prev;
        }
    }
    VectorXd best = w;

    MinVarianceResult result;
    std::size_t stalled = 0;
    for (std::size_t k = 0; k < options.max_iter; ++k) {
        VectorXd grad = 2.0 * (q * w);
        if (c > 0.0) {
            for (Index i = 0; i < n; ++i) {
                const double d = w(i) - (*prev)(i);
                grad(i) += d > 0.0 ? c : (d < 0.0 ? -c : 0.0);
            }
        }
        const double step = 1.0 / (lipschitz * std::sqrt(1.0 + static_cast<double>(k) / 100.0));
        w = project_to_simplex(w - step * grad);
        const double value = objective(w);
        result.iterations = k + 1;
        const double improvement = best_value - value;
        if (value < best_value) {
            best_value = value;
            best = w;
        }
        stalled = improvement < options.tolerance ? stalled + 1 : 0;
        if (stalled >= options.patience) {
            result.converged = true;
            break;
        }
    }
    if (!best.allFinite() || std::abs(best.sum() - 1.0) > 1e-9 || best.minCoeff() < 0.0) {
        throw RunError(fmt::format("min_variance: infeasible weights (sum {})", best.sum()));
    }
    result.weights = best;
    result.objective = min_variance_objective(cov, best, prev, cost);
    return result;
}

} // namespace covcast
