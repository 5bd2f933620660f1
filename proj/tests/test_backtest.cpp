#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "covcast/backtest.hpp"
#include "covcast/csv.hpp"
#include "covcast/errors.hpp"
#include "covcast/market_data.hpp"
#include "covcast/rng.hpp"
#include "covcast/synth.hpp"

using namespace covcast;
using Eigen::MatrixXd;

namespace {

struct Market {
    PricePanel prices;
    CapPanel caps;
};

Market make_market(const MatrixXd& prices, const std::vector<AssetClass>& classes)
{
    Market m;
    for (Eigen::Index t = 0; t < prices.rows(); ++t) {
        m.prices.dates.push_back(parse_date("2021-01-01") + std::chrono::days(t));
    }
    for (Eigen::Index j = 0; j < prices.cols(); ++j) {
        m.prices.assets.push_back("A" + std::to_string(j));
    }
    m.prices.classes = classes;
    m.prices.prices = prices;
    m.caps.dates = m.prices.dates;
    m.caps.assets = m.prices.assets;
    m.caps.classes = classes;
    m.caps.caps = prices * 1000.0;
    return m;
}

Market synthetic_market()
{
    const SynthDataset d = generate_synthetic(SynthConfig{});
    ClassMap classes;
    for (const auto& row : parse_csv(d.classes_csv).rows) {
        classes[row[0]] = parse_asset_class(row[1]);
    }
    Market m;
    m.prices = build_price_panel(parse_csv(d.prices_csv), classes);
    m.caps = align_caps(build_cap_panel(parse_csv(d.caps_csv)), m.prices);
    return m;
}

void check_accounting(const Market& m, const BacktestReport& rep)
{
    const StrategySpec& s = rep.spec;
    // Daily identity: value = Σ shares · price + cash, with holdings from the
    // latest rebalance and prices carried forward.
    std::size_t k = 0;
    std::map<std::string, long long> holdings;
    for (std::size_t t = 0; t < rep.dates.size(); ++t) {
        if (k < rep.rebalances.size() && rep.rebalances[k].date == rep.dates[t]) {
            holdings.clear();
            for (std::size_t i = 0; i < rep.rebalances[k].universe.size(); ++i) {
                holdings[rep.rebalances[k].universe[i]] = rep.rebalances[k].shares[i];
            }
            CHECK(rep.cash[t] == rep.rebalances[k].cash_after);
            ++k;
        }
        const std::size_t row = *m.prices.date_index(rep.dates[t]);
        double value = rep.cash[t];
        for (const auto& [asset, n] : holdings) {
            value += static_cast<double>(n) * carried_price(m.prices, *m.prices.asset_index(asset), row);
        }
        CHECK(std::abs(value - rep.equity[t]) <= 1e-9 * s.initial_capital);
        CHECK(rep.cash[t] >= -1e-9 * s.initial_capital);
    }
    CHECK(k == rep.rebalances.size());

    double fees = 0.0;
    double notional = 0.0;
    for (const auto& tr : rep.trades) {
        CHECK(tr.commission == s.commission * static_cast<double>(std::llabs(tr.delta)) * tr.price);
        fees += tr.commission;
        notional += static_cast<double>(std::llabs(tr.delta)) * tr.price;
    }
    CHECK(fees == rep.commission_paid);
    CHECK(std::abs(rep.commission_paid - s.commission * notional) <= 1e-12 * rep.commission_paid);

    const ReplayState replay = replay_trades(rep.trades, s.initial_capital);
    CHECK(replay.cash == rep.cash.back());
    for (const auto& [asset, n] : replay.shares) {
        const auto it = holdings.find(asset);
        CHECK(n == (it == holdings.end() ? 0 : it->second));
    }
}

} // namespace

TEST_CASE("single asset buys what it can afford net of commission")
{
    const Market m = make_market(MatrixXd::Constant(10, 1, 10.0), {AssetClass::Stock});
    StrategySpec spec;
    spec.window = 2;
    spec.rebalance = 100;
    spec.initial_capital = 1000.0;
    spec.commission = 0.005;
    const BacktestReport rep = run_backtest(m.prices, m.caps, spec);
    REQUIRE(rep.trades.size() == 1);
    CHECK(rep.trades[0].delta == 99);
    CHECK(rep.cash.front() == doctest::Approx(5.05).epsilon(1e-12));
    CHECK(rep.dates.front() == m.prices.dates[2]);
    CHECK(rep.equity.front() == doctest::Approx(995.05).epsilon(1e-12));
    check_accounting(m, rep);
}

TEST_CASE("constant prices without commission keep equity constant")
{
    MatrixXd prices(40, 3);
    prices.col(0).setConstant(7.0);
    prices.col(1).setConstant(13.0);
    prices.col(2).setConstant(101.0);
    Rng rng(1);
    // Tiny noise in the first rows gives a non-degenerate covariance.
    for (int t = 0; t < 10; ++t) {
        prices.row(t) *= 1.0 + 0.001 * rng.normal();
    }
    const Market m = make_market(prices, {AssetClass::Stock, AssetClass::Stock, AssetClass::Crypto});
    StrategySpec spec;
    spec.window = 5;
    spec.rebalance = 7;
    spec.commission = 0.0;
    spec.min_start_row = 12;
    const BacktestReport rep = run_backtest(m.prices, m.caps, spec);
    CHECK(rep.dates.front() == m.prices.dates[12]);
    for (const double v : rep.equity) {
        CHECK(v == doctest::Approx(spec.initial_capital).epsilon(1e-12));
    }
    CHECK(rep.metrics.arc == doctest::Approx(0.0));
    check_accounting(m, rep);
}

TEST_CASE("full backtest accounting on the synthetic market")
{
    const Market m = synthetic_market();
    for (auto kind : {EstimatorKind::Sample, EstimatorKind::Ewma, EstimatorKind::ShrinkConstCorr}) {
        StrategySpec spec;
        spec.window = 30;
        spec.rebalance = 20;
        spec.model.estimator.kind = kind;
        spec.run_id = "acct";
        const BacktestReport rep = run_backtest(m.prices, m.caps, spec);
        CHECK(rep.rebalances.size() > 10);
        for (const auto& rec : rep.rebalances) {
            CHECK(rec.universe.size() == 6);
            CHECK(rec.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK((rec.weights.array() >= 0.0).all());
        }
        check_accounting(m, rep);
        for (const double v : rep.equity) {
            CHECK(v > 0.0);
        }
    }
}

TEST_CASE("identical specs give identical reports")
{
    const Market m = synthetic_market();
    StrategySpec spec;
    spec.window = 20;
    spec.rebalance = 60;
    spec.model.family = ModelFamily::Lstm;
    spec.model.train.hidden = {3};
    spec.model.train.seq_len = 5;
    spec.model.train.epochs = 2;
    spec.seed = 17;
    const BacktestReport a = run_backtest(m.prices, m.caps, spec);
    const BacktestReport b = run_backtest(m.prices, m.caps, spec);
    CHECK(a.equity == b.equity);
    CHECK(a.trades.size() == b.trades.size());
    for (std::size_t i = 0; i < a.rebalances.size(); ++i) {
        CHECK(a.rebalances[i].weights == b.rebalances[i].weights);
        CHECK(a.rebalances[i].history.val_loss == b.rebalances[i].history.val_loss);
        CHECK(a.rebalances[i].history.val_loss.size() == 2);
    }
    check_accounting(m, a);
}

TEST_CASE("low-rank models on a one-asset universe fall back to a diagonal covariance")
{
    Rng rng(23);
    MatrixXd prices(200, 1);
    prices(0, 0) = 50.0;
    for (Eigen::Index t = 1; t < prices.rows(); ++t) {
        prices(t, 0) = prices(t - 1, 0) * (1.0 + 0.01 * rng.normal());
    }
    const Market m = make_market(prices, {AssetClass::Stock});
    for (const auto family : {ModelFamily::DeepVar, ModelFamily::GpVar}) {
        StrategySpec spec;
        spec.window = 10;
        spec.rebalance = 50;
        spec.model.family = family;
        spec.model.train.seq_len = 5;
        spec.model.train.epochs = 2;
        spec.model.prob.hidden = 3;
        spec.model.prob.low_rank = true;
        spec.model.prob.rank = 2;
        spec.model.prob.mc_samples = 5;
        const BacktestReport rep = run_backtest(m.prices, m.caps, spec);
        CHECK_FALSE(rep.rebalances.empty());
        check_accounting(m, rep);
    }
}

TEST_CASE("an asset that stops trading is sold at the next rebalance")
{
    Rng rng(2);
    MatrixXd prices(60, 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
        double p = 50.0;
        for (Eigen::Index t = 0; t < 60; ++t) {
            p *= 1.0 + 0.01 * rng.normal();
            prices(t, j) = p;
        }
    }
    for (Eigen::Index t = 30; t < 60; ++t) {
        prices(t, 2) = std::numeric_limits<double>::quiet_NaN();
    }
    const Market m = make_market(prices, {AssetClass::Stock, AssetClass::Stock, AssetClass::Stock});
    StrategySpec spec;
    spec.window = 10;
    spec.rebalance = 12;
    const BacktestReport rep = run_backtest(m.prices, m.caps, spec);
    bool sold = false;
    for (const auto& rec : rep.rebalances) {
        if (rec.date > m.prices.dates[29]) {
            CHECK(std::find(rec.universe.begin(), rec.universe.end(), "A2") == rec.universe.end());
        }
    }
    for (const auto& tr : rep.trades) {
        if (tr.asset == "A2" && tr.delta < 0 && tr.date > m.prices.dates[29]) {
            sold = true;
            CHECK(tr.price == prices(29, 2));
        }
    }
    CHECK(sold);
    check_accounting(m, rep);
}

TEST_CASE("history requirements per model family")
{
    StrategySpec spec;
    spec.window = 30;
    CHECK(lookback_returns(spec) == 30);
    spec.model.estimator.kind = EstimatorKind::Ewma;
    CHECK(lookback_returns(spec) == 60);
    spec.model.family = ModelFamily::Persistence;
    CHECK(lookback_returns(spec) == 31);
    spec.model.family = ModelFamily::Lstm;
    spec.model.train.seq_len = 15;
    // Factor rows: 15 inputs + 60 validation + 60 training targets.
    CHECK(lookback_returns(spec) == 30 + 135 - 1);
}

TEST_CASE("not enough history is a data error")
{
    const Market m = make_market(MatrixXd::Constant(10, 1, 10.0), {AssetClass::Stock});
    StrategySpec spec;
    spec.window = 20;
    CHECK_THROWS_AS(run_backtest(m.prices, m.caps, spec), DataError);
}

TEST_CASE("model labels and family names")
{
    ModelSpec m;
    CHECK(m.label() == "Sample");
    m.estimator.kind = EstimatorKind::Ewma;
    m.estimator.decay = 0.9;
    CHECK(m.label() == "Ewma-0.9");
    m.family = ModelFamily::Lstm;
    m.train.hidden = {10, 5};
    m.train.batch_size = 8;
    m.train.seq_len = 15;
    CHECK(m.label() == "LSTM-10x5-b8-s15");
    m.family = ModelFamily::GpVar;
    m.prob.hidden = 5;
    m.prob.copula = true;
    m.prob.low_rank = true;
    CHECK(m.label() == "GPVAR-5x5-b8-s15-copula-rank2");
    CHECK(parse_model_family("deepvar") == ModelFamily::DeepVar);
    CHECK_THROWS_AS(parse_model_family("garch"), std::invalid_argument);
}
