#include "covcast/cholpipe.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/csv.hpp"
#include "covcast/errors.hpp"

namespace covcast {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPivotTol = 1e-12;

bool try_cholesky(const MatrixXd& a, MatrixXd& lower)
{
    const Index n = a.rows();
    lower = MatrixXd::Zero(n, n);
    const double scale = n > 0 ? a.diagonal().maxCoeff() : 0.0;
    if (n > 0 && a.diagonal().minCoeff() < -kPivotTol * std::max(scale, 0.0)) {
        return false;
    }
    if (scale <= 0.0) {
        // All diagonals zero: PSD only if every entry is zero.
        return n == 0 || a.cwiseAbs().maxCoeff() == 0.0;
    }
    const double tol = kPivotTol * scale;
    const double residual_tol = std::sqrt(kPivotTol) * scale;
    for (Index j = 0; j < n; ++j) {
        double pivot = a(j, j);
        for (Index k = 0; k < j; ++k) {
            pivot -= lower(j, k) * lower(j, k);
        }
        if (pivot > tol) {
            const double d = std::sqrt(pivot);
            lower(j, j) = d;
            for (Index i = j + 1; i < n; ++i) {
                double s = a(i, j);
                for (Index k = 0; k < j; ++k) {
                    s -= lower(i, k) * lower(j, k);
                }
                lower(i, j) = s / d;
            }
        } else if (pivot >= -tol) {
            for (Index i = j + 1; i < n; ++i) {
                double s = a(i, j);
                for (Index k = 0; k < j; ++k) {
                    s -= lower(i, k) * lower(j, k);
                }
                if (std::abs(s) > residual_tol) {
                    return false;
                }
            }
        } else {
            return false;
        }
    }
    return true;
}

} // namespace

std::size_t assets_for_factor_count(std::size_t m)
{
    std::size_t n = 0;
    while (factor_count(n) < m) {
        ++n;
    }
    if (factor_count(n) != m) {
        throw std::invalid_argument(fmt::format("{} is not a triangular number of factors", m));
    }
    return n;
}

std::vector<FactorPosition> factor_index_map(std::size_t n_assets)
{
    std::vector<FactorPosition> map;
    map.reserve(factor_count(n_assets));
    for (std::size_t i = 0; i < n_assets; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            map.push_back({i, j});
        }
    }
    return map;
}

MatrixXd cholesky(const MatrixXd& cov)
{
    if (cov.rows() != cov.cols()) {
        throw std::invalid_argument("cholesky: matrix must be square");
    }
    if (!cov.allFinite()) {
        throw RunError("cholesky: non-finite covariance");
    }
    MatrixXd lower;
    if (try_cholesky(cov, lower)) {
        return lower;
    }
    // Round-off in rank-deficient input: smallest diagonal jitter that works.
    const double scale = cov.rows() > 0 ? cov.diagonal().cwiseAbs().maxCoeff() : 0.0;
    for (const double jitter : {1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
        MatrixXd jittered = cov;
        jittered.diagonal().array() += jitter * scale;
        if (try_cholesky(jittered, lower)) {
            return lower;
        }
    }
    throw RunError("cholesky: matrix is indefinite");
}

VectorXd flatten_factor(const MatrixXd& lower)
{
    const auto n = static_cast<std::size_t>(lower.rows());
    VectorXd out(static_cast<Index>(factor_count(n)));
    Index k = 0;
    for (const auto& pos : factor_index_map(n)) {
        out(k++) = lower(static_cast<Index>(pos.row), static_cast<Index>(pos.col));
    }
    return out;
}

MatrixXd reconstruct(const VectorXd& factors)
{
    const std::size_t n = assets_for_factor_count(static_cast<std::size_t>(factors.size()));
    MatrixXd lower = MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n));
    Index k = 0;
    for (const auto& pos : factor_index_map(n)) {
        double v = factors(k++);
        if (pos.row == pos.col) {
            v = std::max(v, 0.0);
        }
        lower(static_cast<Index>(pos.row), static_cast<Index>(pos.col)) = v;
    }
    const MatrixXd gram = lower * lower.transpose();
    return 0.5 * (gram + gram.transpose());
}

namespace {

struct SeriesPlan {
    Index need;
    Index count;
};

SeriesPlan plan_series(const ReturnsMatrix& returns, const EstimatorSpec& spec)
{
    spec.validate();
    const auto need = static_cast<Index>(required_history(spec));
    if (returns.values.rows() < need + 1) {
        throw std::invalid_argument(fmt::format(
            "factor series needs at least {} returns, got {}", need + 1, returns.values.rows()));
    }
    return {need, returns.values.rows() - need + 1};
}

FactorSeries empty_series(const ReturnsMatrix& returns, const SeriesPlan& plan)
{
    FactorSeries series;
    series.assets = returns.assets;
    series.entries.resize(plan.count,
                          static_cast<Index>(factor_count(static_cast<std::size_t>(returns.values.cols()))));
    for (Index s = 0; s < plan.count; ++s) {
        series.dates.push_back(returns.dates[static_cast<std::size_t>(s + plan.need - 1)]);
    }
    return series;
}

void fill_row(FactorSeries& series, const ReturnsMatrix& returns, const EstimatorSpec& spec,
              const SeriesPlan& plan, Index s)
{
    const MatrixXd window = returns.values.middleRows(s, plan.need);
    series.entries.row(s) = flatten_factor(cholesky(estimate(spec, window))).transpose();
}

} // namespace

FactorSeries build_factor_series(const ReturnsMatrix& returns, const EstimatorSpec& spec)
{
    const SeriesPlan plan = plan_series(returns, spec);
    FactorSeries series = empty_series(returns, plan);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (Index s = 0; s < plan.count; ++s) {
        try {
            fill_row(series, returns, spec, plan, s);
        } catch (...) {
#pragma omp critical(covcast_factor_series)
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return series;
}

FactorSeries build_factor_series_serial(const ReturnsMatrix& returns, const EstimatorSpec& spec)
{
    const SeriesPlan plan = plan_series(returns, spec);
    FactorSeries series = empty_series(returns, plan);
    for (Index s = 0; s < plan.count; ++s) {
        fill_row(series, returns, spec, plan, s);
    }
    return series;
}

std::string factor_series_csv(const FactorSeries& series)
{
    std::string out = "date";
    for (const auto& pos : factor_index_map(series.n_assets())) {
        out += fmt::format(",L_{}_{}", pos.row, pos.col);
    }
    out += '\n';
    for (std::size_t t = 0; t < series.length(); ++t) {
        out += format_date(series.dates[t]);
        for (Index k = 0; k < series.entries.cols(); ++k) {
            out += ',';
            out += format_number(series.entries(static_cast<Index>(t), k));
        }
        out += '\n';
    }
    return out;
}

} // namespace covcast
