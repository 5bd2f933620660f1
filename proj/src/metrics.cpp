#include "covcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace covcast {

namespace {

void require_positive(std::span<const double> values, std::size_t min_len, const char* who)
{
    if (values.size() < min_len) {
        throw std::invalid_argument(std::string(who) + ": series too short");
    }
    for (const double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(who) + ": values must be positive and finite");
        }
    }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <typename DayOf>
double loss_duration_days(std::span<const double> values, DayOf day_of)
{
    double peak = values.front();
    std::size_t peak_at = 0;
    bool under = false;
    double longest = 0.0;
    for (std::size_t t = 1; t < values.size(); ++t) {
        if (values[t] >= peak) {
            if (under) {
                longest = std::max(longest, day_of(t) - day_of(peak_at));
                under = false;
            }
            peak = values[t];
            peak_at = t;
        } else {
            under = true;
        }
    }
    if (under) {
        longest = std::max(longest, day_of(values.size() - 1) - day_of(peak_at));
    }
    return longest;
}

} // namespace

double annualized_return(std::span<const double> values, double days)
{
    require_positive(values, 2, "annualized_return");
    if (!(days > 0.0)) {
        throw std::invalid_argument("annualized_return: days must be positive");
    }
    return std::pow(values.back() / values.front(), kDaysPerYear / days) - 1.0;
}

double annualized_stdev(std::span<const double> values)
{
    require_positive(values, 3, "annualized_stdev");
    const std::size_t n = values.size() - 1;
    std::vector<double> returns(n);
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        returns[t] = values[t + 1] / values[t] - 1.0;
        mean += returns[t];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double r : returns) {
        ss += (r - mean) * (r - mean);
    }
    return std::sqrt(kDaysPerYear / static_cast<double>(n) * ss);
}

double max_drawdown(std::span<const double> values)
{
    require_positive(values, 1, "max_drawdown");
    double peak = values.front();
    double worst = 0.0;
    for (const double v : values) {
        peak = std::max(peak, v);
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

double max_loss_duration(std::span<const double> values, std::span<const Date> dates)
{
    require_positive(values, 2, "max_loss_duration");
    if (dates.size() != values.size()) {
        throw std::invalid_argument("max_loss_duration: dates and values differ in length");
    }
    return loss_duration_days(values, [&](std::size_t t) {
               return static_cast<double>(days_between(dates.front(), dates[t]));
           }) /
           kDaysPerYear;
}

double max_loss_duration(std::span<const double> values)
{
    require_positive(values, 2, "max_loss_duration");
    return loss_duration_days(values, [](std::size_t t) { return static_cast<double>(t); }) /
           kDaysPerYear;
}

InformationRatios information_ratios(double arc, double asd, double mdd, double mld)
{
    InformationRatios out;
    if (asd > 0.0) {
        out.ir = arc / asd;
        if (mdd > 0.0) {
            out.ir2 = *out.ir * sign(arc) * arc / mdd;
            if (mld > 0.0) {
                out.ir3 = arc * arc * arc / (asd * mdd * mld);
            }
        }
    }
    return out;
}

MetricsBlock compute_metrics(std::span<const double> values, std::span<const Date> dates)
{
    if (values.size() != dates.size()) {
        throw std::invalid_argument("compute_metrics: dates and values differ in length");
    }
    MetricsBlock m;
    const auto days = static_cast<double>(days_between(dates.front(), dates.back()));
    m.arc = annualized_return(values, days);
    m.asd = annualized_stdev(values);
    m.mdd = max_drawdown(values);
    m.mld = max_loss_duration(values, dates);
    const auto ratios = information_ratios(m.arc, m.asd, m.mdd, m.mld);
    m.ir = ratios.ir;
    m.ir2 = ratios.ir2;
    m.ir3 = ratios.ir3;
    return m;
}

} // namespace covcast
