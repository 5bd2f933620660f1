#pragma once

#include <optional>
#include <span>
#include <vector>

#include "covcast/dates.hpp"

namespace covcast {

constexpr double kDaysPerYear = 365.0;

/// The seven performance measures of an equity curve. A ratio whose
/// denominator is zero is left empty rather than infinite.
struct MetricsBlock {
    double arc = 0.0; ///< annualized return
    double asd = 0.0; ///< annualized standard deviation of daily returns
    double mdd = 0.0; ///< maximum drawdown relative to the running peak
    double mld = 0.0; ///< maximum loss duration, years
    std::optional<double> ir;
    std::optional<double> ir2;
    std::optional<double> ir3;
};

struct InformationRatios {
    std::optional<double> ir;
    std::optional<double> ir2;
    std::optional<double> ir3;
};

/// (P_T / P_0)^(365 / days) - 1.
double annualized_return(std::span<const double> values, double days);

/// sqrt((365 / T) Σ (r_t - r̄)²) over the T simple returns of `values`.
double annualized_stdev(std::span<const double> values);

/// max_τ (peak_τ - P_τ) / peak_τ with peak_τ the running maximum.
double max_drawdown(std::span<const double> values);

/// Longest stretch, in years, from a running peak until the curve gets back
/// to it. A drawdown still open at the end runs to the last date.
double max_loss_duration(std::span<const double> values, std::span<const Date> dates);

/// Same with day offsets 0, 1, 2, ...
double max_loss_duration(std::span<const double> values);

InformationRatios information_ratios(double arc, double asd, double mdd, double mld);

MetricsBlock compute_metrics(std::span<const double> values, std::span<const Date> dates);

} // namespace covcast
