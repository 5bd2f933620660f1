#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covcast/dates.hpp"
#include "covcast/estimators.hpp"
#include "covcast/market_data.hpp"

namespace covcast {

/// Position of one factor series inside the lower-triangular factor.
struct FactorPosition {
    std::size_t row;
    std::size_t col;
    bool operator==(const FactorPosition&) const = default;
};

/// N(N+1)/2.
constexpr std::size_t factor_count(std::size_t n_assets) { return n_assets * (n_assets + 1) / 2; }

/// Inverse of factor_count; throws std::invalid_argument if `m` is not triangular.
std::size_t assets_for_factor_count(std::size_t m);

/// Series ordering: lower triangle, row-major, (0,0), (1,0), (1,1), (2,0), ...
std::vector<FactorPosition> factor_index_map(std::size_t n_assets);

/// Lower Cholesky factor of a PSD matrix. Zero pivots (up to 1e-12 of the
/// largest diagonal) yield zero columns, so semidefinite inputs factor without
/// jitter. An indefinite input is retried once with 1e-10·max diag added to the
/// diagonal; RunError if that fails too.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& cov);

Eigen::VectorXd flatten_factor(const Eigen::MatrixXd& lower);

/// Places `factors` into L (negative diagonal entries clamped to zero) and
/// returns L·Lᵀ.
Eigen::MatrixXd reconstruct(const Eigen::VectorXd& factors);

/// Time series of flattened Cholesky factors of rolling covariance estimates.
struct FactorSeries {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    Eigen::MatrixXd entries; // dates x N(N+1)/2

    std::size_t n_assets() const { return assets.size(); }
    std::size_t length() const { return static_cast<std::size_t>(entries.rows()); }
};

/// One row per timestamp t = w..T, each the factor of the estimator applied to
/// the trailing rows ending at t. The default estimator is the sample
/// covariance over `spec.window` rows.
FactorSeries build_factor_series(const ReturnsMatrix& returns, const EstimatorSpec& spec);

/// Single-threaded reference of build_factor_series.
FactorSeries build_factor_series_serial(const ReturnsMatrix& returns, const EstimatorSpec& spec);

/// `date,L_0_0,L_1_0,...`
std::string factor_series_csv(const FactorSeries& series);

} // namespace covcast
