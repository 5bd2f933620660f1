#include "covcast/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "covcast/allocator.hpp"
#include "covcast/cholpipe.hpp"
#include "covcast/errors.hpp"
#include "covcast/optimizer.hpp"
#include "covcast/rng.hpp"

namespace covcast {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EstimatorSpec classical_spec(const StrategySpec& spec)
{
    EstimatorSpec est = spec.model.estimator;
    est.window = spec.window;
    return est;
}

std::size_t factor_rows(const StrategySpec& spec)
{
    return spec.model.train.seq_len + 2 * spec.window + spec.train_multiple * spec.window;
}

ReturnsMatrix as_returns(const MatrixXd& values)
{
    ReturnsMatrix r;
    r.values = values;
    r.dates.assign(static_cast<std::size_t>(values.rows()), Date{});
    r.assets.resize(static_cast<std::size_t>(values.cols()));
    return r;
}

MatrixXd carried_prices(const PricePanel& panel)
{
    MatrixXd out = panel.prices;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        double last = kNaN;
        for (Eigen::Index t = 0; t < out.rows(); ++t) {
            if (std::isnan(out(t, j))) {
                out(t, j) = last;
            } else {
                last = out(t, j);
            }
        }
    }
    return out;
}

} // namespace

const char* to_string(ModelFamily family)
{
    switch (family) {
    case ModelFamily::Classical: return "Classical";
    case ModelFamily::Persistence: return "Persistence";
    case ModelFamily::Lstm: return "LSTM";
    case ModelFamily::DeepVar: return "DeepVAR";
    case ModelFamily::GpVar: return "GPVAR";
    }
    return "?";
}

ModelFamily parse_model_family(const std::string& name)
{
    for (auto f : {ModelFamily::Classical, ModelFamily::Persistence, ModelFamily::Lstm,
                   ModelFamily::DeepVar, ModelFamily::GpVar}) {
        std::string a = to_string(f);
        std::string b = name;
        std::transform(a.begin(), a.end(), a.begin(), ::tolower);
        std::transform(b.begin(), b.end(), b.begin(), ::tolower);
        if (a == b) {
            return f;
        }
    }
    throw std::invalid_argument(fmt::format("unknown model family '{}'", name));
}

std::string ModelSpec::label() const
{
    switch (family) {
    case ModelFamily::Classical:
        if (estimator.kind == EstimatorKind::Ewma && estimator.decay != EstimatorSpec{}.decay) {
            return fmt::format("Ewma-{}", estimator.decay);
        }
        if (estimator.kind == EstimatorKind::SemiCov &&
            estimator.threshold != EstimatorSpec{}.threshold) {
            return fmt::format("SemiCov-{}", estimator.threshold);
        }
        return to_string(estimator.kind);
    case ModelFamily::Persistence:
        return "Persistence";
    case ModelFamily::Lstm:
        return fmt::format("LSTM-{}-b{}-s{}", fmt::join(train.hidden, "x"), train.batch_size,
                           train.seq_len);
    case ModelFamily::DeepVar:
    case ModelFamily::GpVar:
        return fmt::format("{}-{}-b{}-s{}{}{}{}", to_string(family),
                           fmt::join(std::vector<std::size_t>(prob.layers, prob.hidden), "x"),
                           train.batch_size, train.seq_len, prob.scaling ? "-scale" : "",
                           prob.copula ? "-copula" : "",
                           prob.low_rank ? fmt::format("-rank{}", prob.rank) : "");
    }
    return "?";
}

void StrategySpec::validate() const
{
    if (window < 2) {
        throw std::invalid_argument("window must be at least 2");
    }
    if (rebalance < 1) {
        throw std::invalid_argument("rebalance period must be positive");
    }
    if (!(initial_capital > 0.0)) {
        throw std::invalid_argument("initial capital must be positive");
    }
    if (!(commission >= 0.0 && commission < 1.0)) {
        throw std::invalid_argument("commission rate must lie in [0, 1)");
    }
    if (n_stock + n_crypto == 0) {
        throw std::invalid_argument("universe size must be positive");
    }
    if (model.family == ModelFamily::Classical) {
        classical_spec(*this).validate();
    }
    if (model.neural()) {
        model.train.validate();
        if (train_multiple < 1) {
            throw std::invalid_argument("train_multiple must be positive");
        }
    }
}

std::size_t lookback_returns(const StrategySpec& spec)
{
    switch (spec.model.family) {
    case ModelFamily::Classical:
        return required_history(classical_spec(spec));
    case ModelFamily::Persistence:
        return spec.window + 1;
    default:
        return spec.window + factor_rows(spec) - 1;
    }
}

MatrixXd covariance_for(const StrategySpec& spec, const MatrixXd& returns, std::uint64_t seed,
                        TrainHistory* history)
{
    const ModelSpec& model = spec.model;
    if (model.family == ModelFamily::Classical) {
        return estimate(classical_spec(spec), returns);
    }

    EstimatorSpec sample;
    sample.window = spec.window;
    const FactorSeries series = build_factor_series(as_returns(returns), sample);
    if (model.family == ModelFamily::Persistence) {
        return reconstruct(persistence_forecast(series.entries));
    }

    TrainConfig cfg = model.train;
    cfg.seed = seed;
    cfg.validation_len = 2 * spec.window;
    // A shrunken universe can leave fewer factor series than the configured
    // rank; cap it below the series count.
    ProbConfig prob = model.prob;
    const auto m = static_cast<std::size_t>(series.entries.cols());
    if (prob.low_rank && prob.rank >= m) {
        prob.rank = m - 1;
        prob.low_rank = prob.rank > 0;
    }
    VectorXd forecast;
    TrainHistory hist;
    switch (model.family) {
    case ModelFamily::Lstm: {
        const LstmForecaster f = lstm_train(series.entries, cfg);
        forecast = lstm_forecast(f, series.entries);
        hist = f.history;
        break;
    }
    case ModelFamily::DeepVar: {
        const DeepVarForecaster f = deepvar_train(series.entries, cfg, prob);
        forecast = deepvar_forecast(f, series.entries);
        hist = f.history;
        break;
    }
    case ModelFamily::GpVar: {
        const GpVarForecaster f = gpvar_train(series.entries, cfg, prob);
        forecast = gpvar_forecast(f, series.entries);
        hist = f.history;
        break;
    }
    default:
        break;
    }
    if (history != nullptr) {
        *history = std::move(hist);
    }
    return reconstruct(forecast);
}

double carried_price(const PricePanel& panel, std::size_t asset, std::size_t row)
{
    for (std::size_t t = row + 1; t-- > 0;) {
        const double p = panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(asset));
        if (!std::isnan(p)) {
            return p;
        }
    }
    return kNaN;
}

BacktestReport run_backtest(const PricePanel& panel, const CapPanel& caps, const StrategySpec& spec)
{
    spec.validate();
    if (caps.dates != panel.dates || caps.assets != panel.assets) {
        throw std::invalid_argument("cap panel is not aligned to the price panel");
    }
    const std::size_t T = panel.rows();
    const std::size_t N = panel.cols();
    const std::size_t L = lookback_returns(spec);
    const MatrixXd mtm = carried_prices(panel);

    auto eligible_at = [&](std::size_t d) {
        std::vector<bool> ok(N, false);
        for (std::size_t j = 0; j < N; ++j) {
            ok[j] = panel.available(j, d - L, d);
        }
        return ok;
    };
    auto universe_at = [&](std::size_t d) {
        const std::vector<bool> ok = eligible_at(d);
        auto stocks = rank_by_cap(caps, d, AssetClass::Stock, &ok);
        auto cryptos = rank_by_cap(caps, d, AssetClass::Crypto, &ok);
        stocks.resize(std::min(stocks.size(), spec.n_stock));
        cryptos.resize(std::min(cryptos.size(), spec.n_crypto));
        stocks.insert(stocks.end(), cryptos.begin(), cryptos.end());
        return stocks;
    };

    std::optional<std::size_t> start;
    for (std::size_t d = std::max(L, spec.min_start_row); d < T; ++d) {
        if (!universe_at(d).empty()) {
            start = d;
            break;
        }
    }
    if (!start) {
        throw DataError(fmt::format("{}: no date has {} returns of history for any asset",
                                    spec.run_id, L));
    }

    BacktestReport report;
    report.spec = spec;
    double cash = spec.initial_capital;
    std::vector<long long> shares(N, 0);
    std::size_t k = 0;

    for (std::size_t t = *start; t < T; ++t) {
        if ((t - *start) % spec.rebalance == 0) {
            const std::vector<std::string> universe = universe_at(t);
            if (universe.empty()) {
                throw RunError(fmt::format("{}: empty universe on {}", spec.run_id,
                                           format_date(panel.dates[t])));
            }
            std::vector<std::size_t> idx;
            for (const auto& a : universe) {
                idx.push_back(*panel.asset_index(a));
            }
            auto record_trade = [&](std::size_t j, long long delta, double price) {
                const double fee = spec.commission * static_cast<double>(std::llabs(delta)) * price;
                cash -= static_cast<double>(delta) * price + fee;
                shares[j] += delta;
                report.commission_paid += fee;
                report.traded_notional += static_cast<double>(std::llabs(delta)) * price;
                report.trades.push_back({panel.dates[t], panel.assets[j], delta, price, fee});
            };

            // Leaving assets are sold before the new weights are computed.
            for (std::size_t j = 0; j < N; ++j) {
                if (shares[j] != 0 && std::find(idx.begin(), idx.end(), j) == idx.end()) {
                    const double p = mtm(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
                    record_trade(j, -shares[j], p);
                }
            }

            const auto n = static_cast<Eigen::Index>(idx.size());
            VectorXd prices(n);
            VectorXd held(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto j = idx[static_cast<std::size_t>(i)];
                prices(i) = panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
                held(i) = static_cast<double>(shares[j]) * prices(i);
            }
            const double held_value = held.sum();
            const double value = cash + held_value;

            const ReturnsMatrix returns = compute_returns(panel, idx, t - L, t);
            RebalanceRecord rec;
            const MatrixXd cov = covariance_for(spec, returns.values, derive_seed(spec.seed, k),
                                                spec.model.neural() ? &rec.history : nullptr);
            if (!cov.allFinite()) {
                throw RunError(fmt::format("{}: covariance on {} is not finite", spec.run_id,
                                           format_date(panel.dates[t])));
            }
            std::optional<VectorXd> prev;
            if (held_value > 0.0) {
                prev = held / value;
            }
            MinVarianceOptions opts;
            opts.cost_rate = spec.commission;
            const MinVarianceResult mv = min_variance(cov, prev, opts);

            const double budget = value - spec.commission * held_value;
            const Allocation alloc = greedy_allocate(mv.weights, prices, budget, spec.commission);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto j = idx[static_cast<std::size_t>(i)];
                const long long delta = alloc.shares[static_cast<std::size_t>(i)] - shares[j];
                if (delta != 0) {
                    record_trade(j, delta, prices(i));
                }
            }
            if (cash < -1e-9 * spec.initial_capital) {
                throw RunError(fmt::format("{}: cash went negative ({}) on {}", spec.run_id, cash,
                                           format_date(panel.dates[t])));
            }

            rec.date = panel.dates[t];
            rec.universe = universe;
            rec.weights = mv.weights;
            rec.expected_returns =
                mean_historical_returns(returns.values.bottomRows(static_cast<Eigen::Index>(
                    std::min<std::size_t>(spec.window, static_cast<std::size_t>(returns.values.rows())))));
            for (const auto j : idx) {
                rec.shares.push_back(shares[j]);
            }
            rec.cash_after = cash;
            spdlog::debug("{} rebalance {} on {}: value {:.2f}, cash {:.2f}", spec.run_id, k,
                          format_date(panel.dates[t]), value, cash);
            report.rebalances.push_back(std::move(rec));
            ++k;
        }

        double value = cash;
        for (std::size_t j = 0; j < N; ++j) {
            if (shares[j] != 0) {
                value += static_cast<double>(shares[j]) *
                         mtm(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
            }
        }
        report.dates.push_back(panel.dates[t]);
        report.equity.push_back(value);
        report.cash.push_back(cash);
    }

    report.metrics = compute_metrics(report.equity, report.dates);
    return report;
}

ReplayState replay_trades(const std::vector<Trade>& trades, double initial_capital)
{
    ReplayState state;
    state.cash = initial_capital;
    for (const auto& tr : trades) {
        state.cash -= static_cast<double>(tr.delta) * tr.price + tr.commission;
        state.shares[tr.asset] += tr.delta;
    }
    return state;
}

} // namespace covcast
