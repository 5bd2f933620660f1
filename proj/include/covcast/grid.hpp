#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "covcast/backtest.hpp"
#include "covcast/config.hpp"
#include "covcast/market_data.hpp"

namespace covcast {

struct MarketData {
    PricePanel prices;
    CapPanel caps; ///< aligned to `prices`
};

MarketData load_market_data(const RunConfig& cfg);

struct GridCell {
    std::string run_id;
    StrategySpec spec;
};

/// One cell per (window, rebalance, model), ordered by window, rebalance, then
/// model list order. Seeds derive from the master seed and the run id.
std::vector<GridCell> expand_grid(const RunConfig& cfg);

struct RunOutcome {
    GridCell cell;
    bool ok = false;
    bool data_error = false; ///< failure caused by the inputs rather than the model
    std::string error;
    std::optional<BacktestReport> report;
};

/// Runs every cell on a pool of cfg.jobs threads. A cell that throws is
/// recorded as failed. Output is in expand_grid order.
std::vector<RunOutcome> run_grid(const RunConfig& cfg, const MarketData& data);

struct SummaryRow {
    std::string run_id;
    std::size_t window = 0;
    std::size_t rebalance = 0;
    std::string family;
    std::string model;
    std::string status;
    std::optional<double> arc, asd, mdd, mld, ir, ir2, ir3;
    std::string batch_size, length, cells, scaling, copula, low_rank;
    std::string error;
};

SummaryRow summary_row(const RunOutcome& outcome);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary(const CsvTable& table);
std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

struct Describe {
    double mean = 0.0;
    std::optional<double> std_dev; ///< sample (n-1), undefined for n < 2
    double min = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, max = 0.0;
    std::size_t n = 0;
};

/// Linear-interpolation quantiles; `values` must be non-empty.
Describe describe(std::vector<double> values);

/// Per (window, rebalance, family) statistics of aRC and IR over ok runs.
std::string aggregate_csv(const std::vector<SummaryRow>& rows);

/// Ok runs of each (window, rebalance, family) group sorted by aRC desc, IR
/// desc (undefined last), then run id.
std::vector<std::vector<SummaryRow>> ranked_groups(const std::vector<SummaryRow>& rows);

/// Top-k and bottom-k of every group.
std::string rank_csv(const std::vector<SummaryRow>& rows, std::size_t k);

void write_run_artifacts(const RunOutcome& outcome, const std::filesystem::path& run_dir);

/// runs/<run_id>/..., summary.csv and aggregate.csv under `out`.
std::vector<SummaryRow> write_grid_outputs(const std::vector<RunOutcome>& outcomes,
                                           const std::filesystem::path& out);

} // namespace covcast
