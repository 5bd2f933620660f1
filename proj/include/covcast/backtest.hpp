#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covcast/dates.hpp"
#include "covcast/estimators.hpp"
#include "covcast/forecasters.hpp"
#include "covcast/market_data.hpp"
#include "covcast/metrics.hpp"

namespace covcast {

enum class ModelFamily { Classical, Persistence, Lstm, DeepVar, GpVar };

const char* to_string(ModelFamily family);
ModelFamily parse_model_family(const std::string& name);

/// How Σ is produced at each rebalance: a classical estimator on the trailing
/// window, or a forecast of the Cholesky-factor series.
struct ModelSpec {
    ModelFamily family = ModelFamily::Classical;
    EstimatorSpec estimator; ///< Classical only; window is taken from the strategy
    TrainConfig train;       ///< neural families; seed and validation_len are set per rebalance
    ProbConfig prob;         ///< DeepVar and GpVar

    bool neural() const
    {
        return family == ModelFamily::Lstm || family == ModelFamily::DeepVar ||
               family == ModelFamily::GpVar;
    }
    /// Short unique description, e.g. `Ewma` or `LSTM-10x10-b16-s20`.
    std::string label() const;
};

struct StrategySpec {
    std::size_t window = 30;
    std::size_t rebalance = 30;
    ModelSpec model;
    double initial_capital = 100000.0;
    double commission = 0.005;
    std::size_t n_stock = 10;
    std::size_t n_crypto = 10;
    std::uint64_t seed = 0;
    std::string run_id = "run";
    /// Neural models train on train_multiple·window targets before the
    /// 2·window validation targets.
    std::size_t train_multiple = 2;
    /// Earliest panel row allowed as the first rebalance date.
    std::size_t min_start_row = 0;

    void validate() const;
};

/// Returns needed before a rebalance date.
std::size_t lookback_returns(const StrategySpec& spec);

struct Trade {
    Date date;
    std::string asset;
    long long delta = 0;
    double price = 0.0;
    double commission = 0.0;
};

struct RebalanceRecord {
    Date date;
    std::vector<std::string> universe;
    Eigen::VectorXd weights;
    Eigen::VectorXd expected_returns;
    std::vector<long long> shares; ///< holdings after trading, universe order
    double cash_after = 0.0;
    TrainHistory history;          ///< empty for non-neural models
};

struct BacktestReport {
    StrategySpec spec;
    std::vector<Date> dates;
    std::vector<double> equity;
    std::vector<double> cash;
    std::vector<Trade> trades;
    std::vector<RebalanceRecord> rebalances;
    MetricsBlock metrics;
    double commission_paid = 0.0;
    double traded_notional = 0.0;
};

/// Runs the rebalancing loop: select the universe, estimate or forecast Σ,
/// optimize with the turnover penalty, allocate integer shares net of
/// commission, and mark to market daily. `caps` must be aligned to `panel`.
BacktestReport run_backtest(const PricePanel& panel, const CapPanel& caps, const StrategySpec& spec);

/// Σ for one universe from its trailing returns (lookback_returns(spec) rows).
Eigen::MatrixXd covariance_for(const StrategySpec& spec, const Eigen::MatrixXd& returns,
                               std::uint64_t seed, TrainHistory* history = nullptr);

struct ReplayState {
    std::map<std::string, long long> shares;
    double cash = 0.0;
};

/// Applies the trade log in order starting from all-cash `initial_capital`.
ReplayState replay_trades(const std::vector<Trade>& trades, double initial_capital);

/// Last known price at or before `row`, NaN if the asset was never quoted.
double carried_price(const PricePanel& panel, std::size_t asset, std::size_t row);

} // namespace covcast
