#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "covcast/config.hpp"
#include "covcast/csv.hpp"
#include "covcast/errors.hpp"
#include "covcast/grid.hpp"
#include "covcast/synth.hpp"

namespace fs = std::filesystem;
using namespace covcast;

namespace {

struct GridFlags {
    std::string config;
    std::string prices, caps, classes, out;
    std::vector<std::size_t> windows, rebalances;
    std::vector<std::string> estimators;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

void add_data_flags(CLI::App* cmd, GridFlags& f)
{
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--prices", f.prices, "wide price CSV (date + one column per ticker)");
    cmd->add_option("--caps", f.caps, "wide market-cap CSV");
    cmd->add_option("--classes", f.classes, "ticker,class CSV");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "master seed");
}

RunConfig build_config(const GridFlags& f)
{
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.config.empty()) {
        cfg.models = classical_models();
    }
    if (!f.prices.empty()) {
        cfg.prices = f.prices;
    }
    if (!f.caps.empty()) {
        cfg.caps = f.caps;
    }
    if (!f.classes.empty()) {
        cfg.classes = f.classes;
    }
    if (!f.out.empty()) {
        cfg.out = f.out;
    }
    if (!f.windows.empty()) {
        cfg.windows = f.windows;
    }
    if (!f.rebalances.empty()) {
        cfg.rebalances = f.rebalances;
    }
    if (!f.estimators.empty()) {
        cfg.models.clear();
        for (const auto& e : f.estimators) {
            cfg.models.push_back(parse_model_name(e));
        }
    }
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    if (f.jobs) {
        cfg.jobs = *f.jobs;
    }
    cfg.validate();
    return cfg;
}

int run_and_write(const RunConfig& cfg, bool single)
{
    const MarketData data = load_market_data(cfg);
    const auto outcomes = run_grid(cfg, data);
    const auto rows = write_grid_outputs(outcomes, cfg.out);
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (r.status != "ok") {
            ++failed;
        }
    }
    fmt::print("{} runs, {} failed; summary at {}\n", rows.size(), failed,
               (cfg.out / "summary.csv").string());
    if (single && !rows.empty()) {
        const auto& r = rows.front();
        if (r.status != "ok") {
            fmt::print(stderr, "run failed: {}\n", outcomes.front().error);
            return outcomes.front().data_error ? 2 : 3;
        }
        auto show = [](const std::optional<double>& v) {
            return v ? fmt::format("{:.6g}", *v) : std::string("undefined");
        };
        fmt::print("aRC {}  aSD {}  MD {}  MLD {}  IR {}  IR2 {}  IR3 {}\n", show(r.arc),
                   show(r.asd), show(r.mdd), show(r.mld), show(r.ir), show(r.ir2), show(r.ir3));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Covariance forecasting and minimum-variance backtests"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    GridFlags single_flags;
    std::size_t window = 30;
    std::size_t rebalance = 30;
    std::string estimator = "Sample";
    auto* backtest = app.add_subcommand(
        "backtest", "run one strategy (first window, rebalance and model of --config by default)");
    add_data_flags(backtest, single_flags);
    auto* window_opt = backtest->add_option("--window", window, "estimation window in days");
    auto* rebalance_opt = backtest->add_option("--rebalance", rebalance, "days between rebalances");
    auto* estimator_opt = backtest->add_option(
        "--estimator", estimator,
        "Sample, SemiCov, Ewma, ShrinkConstVar, ShrinkSingleFactor, ShrinkConstCorr, "
        "OracleApprox, Persistence, LSTM, DeepVAR or GPVAR");

    GridFlags grid_flags;
    auto* grid = app.add_subcommand("grid", "run every combination of the configured grid");
    add_data_flags(grid, grid_flags);
    grid->add_option("--window", grid_flags.windows, "windows (overrides config)");
    grid->add_option("--rebalance", grid_flags.rebalances, "rebalance periods (overrides config)");
    grid->add_option("--estimator", grid_flags.estimators, "models (overrides config)");
    grid->add_option("--jobs", grid_flags.jobs, "parallel runs");

    std::string summary_path;
    std::string rank_out;
    std::size_t top = 3;
    auto* rank = app.add_subcommand("rank", "best and worst strategies per group");
    rank->add_option("--summary", summary_path, "summary.csv (default <out>/summary.csv)");
    rank->add_option("--out", rank_out, "grid output directory; rank.csv is written here");
    rank->add_option("--top", top, "strategies per list")->check(CLI::PositiveNumber);

    SynthConfig synth_cfg;
    std::string synth_out = "synthetic";
    auto* synth = app.add_subcommand("synth", "write the synthetic test market");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_cfg.seed, "generator seed");
    synth->add_option("--days", synth_cfg.days, "calendar days");
    synth->add_option("--stocks", synth_cfg.n_stock, "number of stocks");
    synth->add_option("--cryptos", synth_cfg.n_crypto, "number of cryptocurrencies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        spdlog::set_level(spdlog::level::from_str(log_level));
        if (*backtest) {
            RunConfig cfg = build_config(single_flags);
            const bool from_file = !single_flags.config.empty();
            cfg.windows = {*window_opt || !from_file ? window : cfg.windows.front()};
            cfg.rebalances = {*rebalance_opt || !from_file ? rebalance : cfg.rebalances.front()};
            cfg.models = {*estimator_opt || !from_file ? parse_model_name(estimator)
                                                       : cfg.models.front()};
            cfg.jobs = 1;
            cfg.validate();
            return run_and_write(cfg, true);
        }
        if (*grid) {
            return run_and_write(build_config(grid_flags), false);
        }
        if (*rank) {
            if (summary_path.empty() && rank_out.empty()) {
                throw std::invalid_argument("rank needs --summary or --out");
            }
            const fs::path summary =
                summary_path.empty() ? fs::path(rank_out) / "summary.csv" : fs::path(summary_path);
            const std::string table = rank_csv(read_summary(summary), top);
            if (!rank_out.empty()) {
                write_text(fs::path(rank_out) / "rank.csv", table);
            }
            std::cout << table;
            return 0;
        }
        if (*synth) {
            const SynthPaths paths = write_synthetic(synth_out, synth_cfg);
            fmt::print("wrote {}, {}, {}\n", paths.prices.string(), paths.caps.string(),
                       paths.classes.string());
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return 1;
    } catch (const DataError& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "run failure: {}\n", e.what());
        return 3;
    }
    return 1;
}
