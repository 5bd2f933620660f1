#include "covcast/allocator.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace covcast {

Allocation greedy_allocate(const Eigen::VectorXd& weights, const Eigen::VectorXd& prices,
                           double capital, double commission_rate)
{
    const Eigen::Index n = weights.size();
    if (prices.size() != n) {
        throw std::invalid_argument("greedy_allocate: weights and prices differ in length");
    }
    if (!(capital >= 0.0) || !std::isfinite(capital)) {
        throw std::invalid_argument(fmt::format("greedy_allocate: invalid capital {}", capital));
    }
    if (!(commission_rate >= 0.0)) {
        throw std::invalid_argument("greedy_allocate: negative commission rate");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(prices(i) > 0.0) || !std::isfinite(prices(i))) {
            throw std::invalid_argument(
                fmt::format("greedy_allocate: non-positive price {} at index {}", prices(i), i));
        }
    }

    Allocation out;
    out.shares.assign(static_cast<std::size_t>(n), 0);
    double cash = capital;
    if (capital == 0.0) {
        out.leftover_cash = 0.0;
        return out;
    }
    const Eigen::VectorXd unit_cost = prices * (1.0 + commission_rate);

    for (Eigen::Index i = 0; i < n; ++i) {
        const double target = std::max(weights(i), 0.0) * capital;
        auto count = static_cast<long long>(std::floor(target / unit_cost(i)));
        while (count > 0 && static_cast<double>(count) * unit_cost(i) > cash) {
            --count;
        }
        out.shares[static_cast<std::size_t>(i)] = count;
        cash -= static_cast<double>(count) * unit_cost(i);
    }

    for (;;) {
        Eigen::Index pick = -1;
        double best = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double held = static_cast<double>(out.shares[static_cast<std::size_t>(i)]) * prices(i);
            const double deficit = weights(i) - held / capital;
            if (deficit > best && unit_cost(i) <= cash) {
                best = deficit;
                pick = i;
            }
        }
        if (pick < 0) {
            break;
        }
        ++out.shares[static_cast<std::size_t>(pick)];
        cash -= unit_cost(pick);
    }
    out.leftover_cash = cash;
    return out;
}

} // namespace covcast
