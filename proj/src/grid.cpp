#include "covcast/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "covcast/csv.hpp"
#include "covcast/errors.hpp"
#include "covcast/rng.hpp"

namespace covcast {

namespace {

const std::vector<std::string> kSummaryHeader{
    "run_id", "window", "rebalance", "family", "model", "status", "aRC", "aSD", "MD", "MLD", "IR",
    "IR2", "IR3", "Batch Size", "Length", "Cells", "Scaling", "Copula", "Low Rank", "error"};

std::string clean(std::string text)
{
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r') {
            c = c == ',' ? ';' : ' ';
        }
    }
    return text;
}

std::string opt_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string{};
}

std::optional<double> parse_opt(const std::string& s)
{
    if (s.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw DataError(fmt::format("summary: bad number '{}'", s));
    }
}

const char* flag(bool b) { return b ? "True" : "False"; }

int family_order(const std::string& family)
{
    try {
        return static_cast<int>(parse_model_family(family));
    } catch (const std::invalid_argument&) {
        return 99;
    }
}

using GroupKey = std::tuple<std::size_t, std::size_t, int, std::string>;

GroupKey group_key(const SummaryRow& r)
{
    return {r.window, r.rebalance, family_order(r.family), r.family};
}

double quantile(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string join_row(const std::vector<std::string>& cells)
{
    return fmt::format("{}\n", fmt::join(cells, ","));
}

} // namespace

MarketData load_market_data(const RunConfig& cfg)
{
    cfg.validate_paths();
    MarketData data;
    data.prices = load_price_panel(cfg.prices, load_class_map(cfg.classes));
    data.caps = align_caps(load_cap_panel(cfg.caps), data.prices);
    return data;
}

std::vector<GridCell> expand_grid(const RunConfig& cfg)
{
    cfg.validate();
    std::vector<GridCell> cells;
    std::map<std::string, int> seen;
    for (const auto w : cfg.windows) {
        std::size_t start = 0;
        std::vector<GridCell> block;
        for (const auto r : cfg.rebalances) {
            for (const auto& m : cfg.models) {
                GridCell c;
                c.spec.window = w;
                c.spec.rebalance = r;
                c.spec.model = m;
                c.spec.initial_capital = cfg.initial_capital;
                c.spec.commission = cfg.commission;
                c.spec.n_stock = cfg.n_stock;
                c.spec.n_crypto = cfg.n_crypto;
                c.spec.train_multiple = cfg.train_multiple;
                c.run_id = fmt::format("w{}-r{}-{}", w, r, m.label());
                const int dup = seen[c.run_id]++;
                if (dup > 0) {
                    c.run_id += fmt::format("-{}", dup + 1);
                }
                c.spec.run_id = c.run_id;
                c.spec.seed = derive_seed(cfg.seed, hash_name(c.run_id));
                start = std::max(start, lookback_returns(c.spec));
                block.push_back(std::move(c));
            }
        }
        for (auto& c : block) {
            if (cfg.align_start) {
                c.spec.min_start_row = start;
            }
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

std::vector<RunOutcome> run_grid(const RunConfig& cfg, const MarketData& data)
{
    const std::vector<GridCell> cells = expand_grid(cfg);
    std::vector<RunOutcome> outcomes(cells.size());
    const auto n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(cfg.jobs))
    for (long i = 0; i < n; ++i) {
        RunOutcome& out = outcomes[static_cast<std::size_t>(i)];
        out.cell = cells[static_cast<std::size_t>(i)];
        try {
            out.report = run_backtest(data.prices, data.caps, out.cell.spec);
            out.ok = true;
            spdlog::info("{}: ok, aRC {:.4f}", out.cell.run_id, out.report->metrics.arc);
        } catch (const DataError& e) {
            out.data_error = true;
            out.error = e.what();
            spdlog::warn("{}: failed: {}", out.cell.run_id, out.error);
        } catch (const std::exception& e) {
            out.error = e.what();
            spdlog::warn("{}: failed: {}", out.cell.run_id, out.error);
        }
    }
    return outcomes;
}

SummaryRow summary_row(const RunOutcome& o)
{
    const StrategySpec& s = o.cell.spec;
    SummaryRow r;
    r.run_id = o.cell.run_id;
    r.window = s.window;
    r.rebalance = s.rebalance;
    r.family = to_string(s.model.family);
    r.model = s.model.label();
    r.status = o.ok ? "ok" : "failed";
    if (o.ok && o.report) {
        const MetricsBlock& m = o.report->metrics;
        r.arc = m.arc;
        r.asd = m.asd;
        r.mdd = m.mdd;
        r.mld = m.mld;
        r.ir = m.ir;
        r.ir2 = m.ir2;
        r.ir3 = m.ir3;
    }
    if (s.model.neural()) {
        r.batch_size = std::to_string(s.model.train.batch_size);
        r.length = std::to_string(s.model.train.seq_len);
    }
    if (s.model.family == ModelFamily::Lstm) {
        r.cells = fmt::format("[{}]", fmt::join(s.model.train.hidden, " "));
    } else if (s.model.family == ModelFamily::DeepVar || s.model.family == ModelFamily::GpVar) {
        const ProbConfig& p = s.model.prob;
        r.cells = fmt::format("[{}]", fmt::join(std::vector<std::size_t>(p.layers, p.hidden), " "));
        r.scaling = flag(p.scaling);
        r.copula = flag(p.copula);
        r.low_rank = flag(p.low_rank);
    }
    r.error = clean(o.error);
    return r;
}

std::string summary_csv(const std::vector<SummaryRow>& rows)
{
    std::string out = join_row(kSummaryHeader);
    for (const auto& r : rows) {
        out += join_row({r.run_id, std::to_string(r.window), std::to_string(r.rebalance), r.family,
                         r.model, r.status, opt_number(r.arc), opt_number(r.asd),
                         opt_number(r.mdd), opt_number(r.mld), opt_number(r.ir), opt_number(r.ir2),
                         opt_number(r.ir3), r.batch_size, r.length, r.cells, r.scaling, r.copula,
                         r.low_rank, clean(r.error)});
    }
    return out;
}

std::vector<SummaryRow> parse_summary(const CsvTable& table)
{
    if (table.header != kSummaryHeader) {
        throw DataError("summary: unexpected header");
    }
    std::vector<SummaryRow> rows;
    for (const auto& c : table.rows) {
        SummaryRow r;
        r.run_id = c[0];
        try {
            r.window = std::stoul(c[1]);
            r.rebalance = std::stoul(c[2]);
        } catch (const std::exception&) {
            throw DataError(fmt::format("summary: bad window or rebalance for '{}'", c[0]));
        }
        r.family = c[3];
        r.model = c[4];
        r.status = c[5];
        r.arc = parse_opt(c[6]);
        r.asd = parse_opt(c[7]);
        r.mdd = parse_opt(c[8]);
        r.mld = parse_opt(c[9]);
        r.ir = parse_opt(c[10]);
        r.ir2 = parse_opt(c[11]);
        r.ir3 = parse_opt(c[12]);
        r.batch_size = c[13];
        r.length = c[14];
        r.cells = c[15];
        r.scaling = c[16];
        r.copula = c[17];
        r.low_rank = c[18];
        r.error = c[19];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SummaryRow> read_summary(const std::filesystem::path& path)
{
    return parse_summary(read_csv(path));
}

Describe describe(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("describe: no values");
    }
    std::sort(values.begin(), values.end());
    Describe d;
    d.n = values.size();
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    d.mean = sum / static_cast<double>(d.n);
    if (d.n > 1) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - d.mean) * (v - d.mean);
        }
        d.std_dev = std::sqrt(ss / static_cast<double>(d.n - 1));
    }
    d.min = values.front();
    d.max = values.back();
    d.q25 = quantile(values, 0.25);
    d.q50 = quantile(values, 0.50);
    d.q75 = quantile(values, 0.75);
    return d;
}

std::string aggregate_csv(const std::vector<SummaryRow>& rows)
{
    std::map<GroupKey, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : rows) {
        if (r.status != "ok") {
            continue;
        }
        auto& g = groups[group_key(r)];
        if (r.arc) {
            g.first.push_back(*r.arc);
        }
        if (r.ir) {
            g.second.push_back(*r.ir);
        }
    }
    std::string out = join_row({"Window", "Rebalancing", "Covariance Model", "Metric", "Mean",
                                "Std. Dev", "Min", "25%", "50%", "75%", "Max", "N"});
    for (const auto& [key, g] : groups) {
        for (const auto& [metric, values] : {std::pair{"aRC", &g.first}, std::pair{"IR", &g.second}}) {
            if (values->empty()) {
                continue;
            }
            const Describe d = describe(*values);
            out += join_row({std::to_string(std::get<0>(key)), std::to_string(std::get<1>(key)),
                             std::get<3>(key), metric, format_number(d.mean), opt_number(d.std_dev),
                             format_number(d.min), format_number(d.q25), format_number(d.q50),
                             format_number(d.q75), format_number(d.max), std::to_string(d.n)});
        }
    }
    return out;
}

std::vector<std::vector<SummaryRow>> ranked_groups(const std::vector<SummaryRow>& rows)
{
    std::map<GroupKey, std::vector<SummaryRow>> groups;
    for (const auto& r : rows) {
        if (r.status == "ok" && r.arc) {
            groups[group_key(r)].push_back(r);
        }
    }
    std::vector<std::vector<SummaryRow>> out;
    for (auto& [key, g] : groups) {
        std::sort(g.begin(), g.end(), [](const SummaryRow& a, const SummaryRow& b) {
            if (*a.arc != *b.arc) {
                return *a.arc > *b.arc;
            }
            if (a.ir.has_value() != b.ir.has_value()) {
                return a.ir.has_value();
            }
            if (a.ir && *a.ir != *b.ir) {
                return *a.ir > *b.ir;
            }
            return a.run_id < b.run_id;
        });
        out.push_back(std::move(g));
    }
    return out;
}

std::string rank_csv(const std::vector<SummaryRow>& rows, std::size_t k)
{
    std::string out = join_row({"Window", "Rebalancing", "Covariance Model", "List", "Position",
                                "run_id", "aRC", "aSD", "MD", "MLD", "IR", "IR2", "IR3",
                                "Batch Size", "Length", "Cells", "Scaling", "Copula", "Low Rank"});
    auto emit = [&](const SummaryRow& r, const char* list, std::size_t pos) {
        out += join_row({std::to_string(r.window), std::to_string(r.rebalance), r.family, list,
                         std::to_string(pos), r.run_id, opt_number(r.arc), opt_number(r.asd),
                         opt_number(r.mdd), opt_number(r.mld), opt_number(r.ir), opt_number(r.ir2),
                         opt_number(r.ir3), r.batch_size, r.length, r.cells, r.scaling, r.copula,
                         r.low_rank});
    };
    for (const auto& g : ranked_groups(rows)) {
        const std::size_t m = std::min(k, g.size());
        for (std::size_t i = 0; i < m; ++i) {
            emit(g[i], "Top", i + 1);
        }
        for (std::size_t i = g.size() - m; i < g.size(); ++i) {
            emit(g[i], "Bottom", i + 1);
        }
    }
    return out;
}

void write_run_artifacts(const RunOutcome& o, const std::filesystem::path& dir)
{
    nlohmann::json spec;
    const StrategySpec& s = o.cell.spec;
    spec["run_id"] = o.cell.run_id;
    spec["window"] = s.window;
    spec["rebalance"] = s.rebalance;
    spec["model"] = model_spec_json(s.model);
    spec["initial_capital"] = s.initial_capital;
    spec["commission"] = s.commission;
    spec["n_stock"] = s.n_stock;
    spec["n_crypto"] = s.n_crypto;
    spec["seed"] = s.seed;
    spec["train_multiple"] = s.train_multiple;
    spec["min_start_row"] = s.min_start_row;
    spec["status"] = o.ok ? "ok" : "failed";
    if (!o.ok) {
        spec["error"] = o.error;
    }
    write_text(dir / "spec.json", spec.dump(2) + "\n");
    if (!o.ok || !o.report) {
        return;
    }
    const BacktestReport& rep = *o.report;

    std::string equity = "date,value,cash\n";
    for (std::size_t t = 0; t < rep.dates.size(); ++t) {
        equity += fmt::format("{},{},{}\n", format_date(rep.dates[t]), format_number(rep.equity[t]),
                              format_number(rep.cash[t]));
    }
    write_text(dir / "equity.csv", equity);

    std::string trades = "date,asset,delta,price,commission\n";
    for (const auto& tr : rep.trades) {
        trades += fmt::format("{},{},{},{},{}\n", format_date(tr.date), tr.asset, tr.delta,
                              format_number(tr.price), format_number(tr.commission));
    }
    write_text(dir / "trades.csv", trades);

    const MetricsBlock& m = rep.metrics;
    std::string metrics = "metric,value\n";
    metrics += fmt::format("aRC,{}\naSD,{}\nMD,{}\nMLD,{}\nIR,{}\nIR2,{}\nIR3,{}\n",
                           format_number(m.arc), format_number(m.asd), format_number(m.mdd),
                           format_number(m.mld), opt_number(m.ir), opt_number(m.ir2),
                           opt_number(m.ir3));
    metrics += fmt::format("commission_paid,{}\ntraded_notional,{}\n",
                           format_number(rep.commission_paid), format_number(rep.traded_notional));
    write_text(dir / "metrics.csv", metrics);

    std::string weights = "date,asset,weight,expected_return,shares\n";
    for (const auto& rec : rep.rebalances) {
        for (std::size_t i = 0; i < rec.universe.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            weights += fmt::format("{},{},{},{},{}\n", format_date(rec.date), rec.universe[i],
                                   format_number(rec.weights(ii)),
                                   format_number(rec.expected_returns(ii)), rec.shares[i]);
        }
    }
    write_text(dir / "weights.csv", weights);

    if (s.model.neural()) {
        std::string losses = "rebalance_date,epoch,train_loss,val_loss\n";
        for (const auto& rec : rep.rebalances) {
            const auto& h = rec.history;
            for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
                losses += fmt::format("{},{},{},{}\n", format_date(rec.date), e + 1,
                                      format_number(h.train_loss[e]),
                                      e < h.val_loss.size() ? format_number(h.val_loss[e]) : "");
            }
        }
        write_text(dir / "val_loss.csv", losses);
    }
}

std::vector<SummaryRow> write_grid_outputs(const std::vector<RunOutcome>& outcomes,
                                           const std::filesystem::path& out)
{
    std::vector<SummaryRow> rows;
    for (const auto& o : outcomes) {
        write_run_artifacts(o, out / "runs" / o.cell.run_id);
        rows.push_back(summary_row(o));
    }
    std::sort(rows.begin(), rows.end(),
              [](const SummaryRow& a, const SummaryRow& b) { return a.run_id < b.run_id; });
    write_text(out / "summary.csv", summary_csv(rows));
    write_text(out / "aggregate.csv", aggregate_csv(rows));
    return rows;
}

} // namespace covcast
