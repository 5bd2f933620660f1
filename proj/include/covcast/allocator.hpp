#pragma once

#include <vector>

#include <Eigen/Dense>

namespace covcast {

struct Allocation {
    std::vector<long long> shares;
    double leftover_cash = 0.0;
};

/// Two-stage greedy integer allocation of `capital` towards `weights`.
///
/// Stage 1 buys floor(w_i·capital / (p_i(1 + c))) of every asset. Stage 2
/// repeatedly buys one share of the asset with the largest positive deficit
/// w_i - shares_i·p_i/capital among those whose price including commission is
/// still affordable (ties go to the lower index), until none is left.
///
/// Invariant: Σ shares_i·p_i·(1 + c) + leftover_cash = capital.
Allocation greedy_allocate(const Eigen::VectorXd& weights, const Eigen::VectorXd& prices,
                           double capital, double commission_rate = 0.0);

} // namespace covcast
