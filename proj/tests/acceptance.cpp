// Acceptance report: one PASS/FAIL line per criterion. Criterion 11 is
// informational and never affects the exit status.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "covcast/allocator.hpp"
#include "covcast/backtest.hpp"
#include "covcast/cholpipe.hpp"
#include "covcast/config.hpp"
#include "covcast/copula.hpp"
#include "covcast/csv.hpp"
#include "covcast/estimators.hpp"
#include "covcast/forecasters.hpp"
#include "covcast/grid.hpp"
#include "covcast/likelihood.hpp"
#include "covcast/lstm.hpp"
#include "covcast/metrics.hpp"
#include "covcast/normal.hpp"
#include "covcast/optimizer.hpp"
#include "covcast/rng.hpp"
#include "covcast/synth.hpp"
#include "gradcheck.hpp"

using namespace covcast;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m(i) = rng.normal();
    }
    return m;
}

double min_eigenvalue(const MatrixXd& a)
{
    return Eigen::SelfAdjointEigenSolver<MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 1 -------------------------------------------------------------------------
Outcome cholesky_round_trip()
{
    const auto start = Clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(12));
        // Some draws are rank-deficient on purpose.
        const auto k = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(n + 3)));
        const MatrixXd a = gaussian(n, k, rng) * std::exp(rng.uniform(-5.0, 2.0));
        const MatrixXd cov = a * a.transpose();
        const MatrixXd back = reconstruct(flatten_factor(cholesky(cov)));
        worst = std::max(worst, (back - cov).norm() / cov.norm());
    }
    double worst_eig = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(1 + rng.below(12));
        VectorXd f(static_cast<Eigen::Index>(factor_count(n)));
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            f(i) = rng.normal();
        }
        const MatrixXd s = reconstruct(f);
        const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
        worst_eig = std::min(worst_eig, min_eigenvalue(s) / scale);
    }
    const double secs = seconds_since(start);
    return {worst <= 1e-10 && worst_eig >= -1e-12 && secs < 5.0,
            fmt::format("max rel Frobenius error {:.3g}, min scaled eigenvalue {:.3g}, {:.2f}s", worst,
                        worst_eig, secs)};
}

// 2 -------------------------------------------------------------------------
Outcome optimizer_brute_force()
{
    const auto start = Clock::now();
    Rng rng(202);
    double worst_gap = -1.0;
    for (int trial = 0; trial < 200; ++trial) {
        const MatrixXd a = gaussian(3, 3 + static_cast<Eigen::Index>(rng.below(3)), rng);
        const MatrixXd cov = a * a.transpose() / 3.0;
        const MinVarianceResult res = min_variance(cov);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; i + j <= 100; ++j) {
                VectorXd w(3);
                w << i / 100.0, j / 100.0, (100 - i - j) / 100.0;
                best = std::min(best, min_variance_objective(cov, w, std::nullopt, 0.0));
            }
        }
        const double obj = min_variance_objective(cov, res.weights, std::nullopt, 0.0);
        worst_gap = std::max(worst_gap, obj - best);
    }
    VectorXd d2(2);
    d2 << 1.0, 4.0;
    VectorXd e2(2);
    e2 << 0.8, 0.2;
    VectorXd d3(3);
    d3 << 1.0, 2.0, 4.0;
    VectorXd e3(3);
    e3 << 4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0;
    const double err2 = (min_variance(MatrixXd(d2.asDiagonal())).weights - e2).cwiseAbs().maxCoeff();
    const double err3 = (min_variance(MatrixXd(d3.asDiagonal())).weights - e3).cwiseAbs().maxCoeff();
    const double secs = seconds_since(start);
    return {worst_gap <= 1e-4 && err2 <= 1e-4 && err3 <= 1e-4 && secs < 30.0,
            fmt::format("worst gap to grid {:.3g}, diag(1,4) error {:.3g}, diag(1,2,4) error {:.3g}, {:.2f}s",
                        worst_gap, err2, err3, secs)};
}

// 3 -------------------------------------------------------------------------
Outcome ewma_unrolled()
{
    const double lambda = EstimatorSpec{}.decay;
    Rng rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 10 + static_cast<int>(rng.below(30));
        const int steps = 1 + static_cast<int>(rng.below(40));
        const MatrixXd h = gaussian(k + steps, 1 + static_cast<Eigen::Index>(rng.below(6)), rng) * 0.02;
        const VectorXd mu = h.topRows(k).colwise().mean().transpose();
        const MatrixXd centered = h.topRows(k).rowwise() - mu.transpose();
        MatrixXd oracle = std::pow(lambda, steps) * (centered.transpose() * centered) / (k - 1.0);
        for (int j = 0; j < steps; ++j) {
            const VectorXd dev = h.row(k + j).transpose() - mu;
            oracle += (1.0 - lambda) * std::pow(lambda, steps - 1 - j) * dev * dev.transpose();
        }
        const MatrixXd got = ewma_cov(h, lambda, static_cast<std::size_t>(k));
        worst = std::max(worst, (got - oracle).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff());
    }
    return {lambda == 0.94 && worst <= 1e-12,
            fmt::format("default decay {}, max relative deviation {:.3g}", lambda, worst)};
}

// 4 -------------------------------------------------------------------------
Outcome oracle_approx_convergence()
{
    // Samples from random SPD covariances at the dimensions a backtest feeds
    // the estimator: up to 20 assets, windows of 30 to 120 days.
    Rng rng(404);
    std::size_t worst_iter = 0;
    int converged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = static_cast<Eigen::Index>(5 + rng.below(16));
        const auto n = static_cast<Eigen::Index>(30 * (1 + rng.below(4)));
        const MatrixXd a = gaussian(p, p, rng);
        const MatrixXd x = 0.02 * gaussian(n, p, rng) * a.transpose();
        const auto r = oracle_approx(sample_cov(x), static_cast<std::size_t>(n));
        converged += r.converged && r.iterations <= 100 ? 1 : 0;
        worst_iter = std::max(worst_iter, r.iterations);
    }
    // Isotropic samples put the second fixed point of the recursion near
    // rho = 1, where the approach is slow. Reported only.
    int isotropic = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = static_cast<Eigen::Index>(5 + rng.below(16));
        const auto n = static_cast<Eigen::Index>(30 * (1 + rng.below(4)));
        isotropic += oracle_approx(sample_cov(gaussian(n, p, rng)), static_cast<std::size_t>(n)).converged ? 1 : 0;
    }
    double smallest = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const MatrixXd x = gaussian(5, 10, rng);
        const auto r = oracle_approx(sample_cov(x), 5);
        smallest = std::min(smallest, min_eigenvalue(r.cov) / r.cov.diagonal().maxCoeff());
    }
    return {converged == 100 && smallest > 1e-10,
            fmt::format("{}/100 converged (max {} iterations), smallest scaled eigenvalue for p=10 n=5 {:.3g}; "
                        "isotropic samples converged {}/100 (not asserted)",
                        converged, worst_iter, smallest, isotropic)};
}

// 5 -------------------------------------------------------------------------
Outcome lstm_gradients()
{
    const auto start = Clock::now();
    LstmModel model(2, {3});
    Rng rng(505);
    model.stack.initialize(model.params, rng);
    model.head.initialize(model.params, rng);
    const MatrixXd seq = gaussian(4, 2, rng);
    VectorXd target(2);
    target << rng.normal(), rng.normal();
    VectorXd grad = model.params.zeros();
    lstm_loss(model, seq, target, &grad);
    const auto report =
        testing::check_gradient(model.params, grad, [&]() { return lstm_loss(model, seq, target); });
    double worst = 0.0;
    std::string worst_block;
    for (const auto& [block, err] : report) {
        if (err >= worst) {
            worst = err;
            worst_block = block;
        }
    }
    const double secs = seconds_since(start);
    return {worst <= 1e-4 && secs < 10.0,
            fmt::format("max relative error {:.3g} ({}), {} groups, {:.2f}s", worst, worst_block,
                        report.size(), secs)};
}

// 6 -------------------------------------------------------------------------
double ks_to_standard_normal(std::vector<double> z)
{
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = normal_cdf(z[i]);
        d = std::max({d, std::abs((i + 1) / n - f), std::abs(i / n - f)});
    }
    return d;
}

Outcome probabilistic_heads()
{
    Rng rng(606);
    const MatrixXd noise = gaussian(2000, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.seq_len = 10;
    cfg.batch_size = 32;
    cfg.seed = 1;
    cfg.validation_len = 400;
    ProbConfig prob;
    prob.hidden = 10;
    const DeepVarForecaster f = deepvar_train(noise, cfg, prob);
    double sigma = 0.0;
    int count = 0;
    for (Eigen::Index t = 1600; t < 2000; ++t) {
        sigma += deepvar_predict(f.model, noise.middleRows(t - 10, 10)).variance.cwiseSqrt().sum();
        count += 2;
    }
    sigma /= count;

    std::vector<double> x(1000);
    for (auto& v : x) {
        v = std::exp(rng.normal()) - 0.5;
    }
    const auto transform = MarginalTransform::fit(x);
    std::vector<double> z;
    for (const double v : x) {
        z.push_back(transform.forward(v));
    }
    const double ks = ks_to_standard_normal(z);
    std::vector<double> held_out;
    for (int i = 0; i < 1000; ++i) {
        held_out.push_back(transform.forward(std::exp(rng.normal()) - 0.5));
    }
    const double ks_held_out = ks_to_standard_normal(held_out);

    double nll_gap = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = static_cast<Eigen::Index>(1 + rng.below(8));
        const VectorXd obs = gaussian(m, 1, rng).col(0);
        const VectorXd mean = gaussian(m, 1, rng).col(0);
        const VectorXd var = gaussian(m, 1, rng).col(0).array().exp();
        const double diag = diagonal_gaussian_nll(obs, mean, var).value;
        const double low = lowrank_gaussian_nll(obs, mean, var, MatrixXd(m, 0)).value;
        nll_gap = std::max(nll_gap, std::abs(diag - low));
    }
    return {sigma >= 0.8 && sigma <= 1.2 && ks < 0.05 && nll_gap <= 1e-10,
            fmt::format("DeepVAR mean sigma {:.4f}, copula KS {:.4f} (fresh draws {:.4f}, not asserted), "
                        "r=0 vs diagonal NLL gap {:.3g}",
                        sigma, ks, ks_held_out, nll_gap)};
}

// 7 -------------------------------------------------------------------------
std::vector<Date> daily(std::size_t n)
{
    std::vector<Date> d;
    for (std::size_t i = 0; i < n; ++i) {
        d.push_back(parse_date("2020-01-01") + std::chrono::days(static_cast<long>(i)));
    }
    return d;
}

// Alternating path with per-pair growth g and half-spread d.
std::vector<double> alternating(double r1, double r2, std::size_t returns)
{
    std::vector<double> v{1.0};
    for (std::size_t t = 0; t < returns; ++t) {
        v.push_back(v.back() * (1.0 + (t % 2 == 0 ? r1 : r2)));
    }
    return v;
}

Outcome metrics_oracle()
{
    double worst = 0.0;
    // Absolute error for O(1) quantities, relative beyond that (IR3 is ~1e5 below).
    auto track = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    };

    const double r1 = 0.012;
    const double r2 = -0.008;
    const auto v = alternating(r1, r2, 730);
    const MetricsBlock m = compute_metrics(v, daily(v.size()));
    const double arc = std::pow((1 + r1) * (1 + r2), 365.0 / 2.0) - 1.0;
    const double asd = std::sqrt(365.0) * (r1 - r2) / 2.0;
    const double mdd = -r2;
    const double mld = 2.0 / 365.0;
    track(m.arc, arc);
    track(m.asd, asd);
    track(m.mdd, mdd);
    track(m.mld, mld);
    track(m.ir.value_or(NAN), arc / asd);
    track(m.ir2.value_or(NAN), arc * arc / (asd * mdd));
    track(m.ir3.value_or(NAN), arc * arc * arc / (asd * mdd * mld));

    const double g = 0.999;
    std::vector<double> decline{1.0};
    for (int t = 0; t < 500; ++t) {
        decline.push_back(decline.back() * g);
    }
    const MetricsBlock d = compute_metrics(decline, daily(decline.size()));
    track(d.arc, std::pow(g, 365.0) - 1.0);
    track(d.mdd, 1.0 - std::pow(g, 500.0));
    track(d.mld, 500.0 / 365.0);

    const auto sign_case = information_ratios(-0.1, 0.2, 0.5, 1.0);
    const double ir2_err = std::abs(sign_case.ir2.value_or(NAN) - (-0.1));

    // Path with aRC 0.15 and aSD 0.15 / 0.699.
    const double target_asd = 0.15 / 0.699;
    const double half = target_asd / std::sqrt(365.0);
    const double pair_growth = std::pow(1.15, 2.0 / 365.0);
    const double mid = std::sqrt(pair_growth + half * half) - 1.0;
    const auto ref_path = alternating(mid + half, mid - half, 3650);
    const MetricsBlock ref = compute_metrics(ref_path, daily(ref_path.size()));
    const double ref_err = std::max(std::abs(ref.arc - 0.15), std::abs(ref.ir.value_or(NAN) - 0.699));

    return {worst <= 1e-9 && ir2_err <= 1e-12 && ref_err <= 1e-3,
            fmt::format("max closed-form error {:.3g}, IR2 sign case {:.6g}, reference aRC {:.6f} IR {:.6f}",
                        worst, sign_case.ir2.value_or(NAN), ref.arc, ref.ir.value_or(NAN))};
}

// 8 -------------------------------------------------------------------------
Outcome allocation_and_accounting(const MarketData& data)
{
    Rng rng(808);
    double worst_identity = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(8));
        VectorXd raw(n);
        VectorXd prices(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            raw(i) = rng.uniform();
            prices(i) = std::exp(rng.uniform(-2.0, 8.0));
        }
        const VectorXd w = project_to_simplex(raw);
        const double capital = std::exp(rng.uniform(0.0, 12.0));
        const double c = trial % 2 == 0 ? 0.0 : 0.005;
        const Allocation a = greedy_allocate(w, prices, capital, c);
        double spent = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            spent += static_cast<double>(a.shares[static_cast<std::size_t>(i)]) * prices(i) * (1.0 + c);
        }
        worst_identity = std::max(worst_identity, std::abs(spent + a.leftover_cash - capital) /
                                                      std::max(1.0, capital));
    }

    double worst_daily = 0.0;
    double worst_fee = 0.0;
    std::size_t trades = 0;
    for (const char* name : {"Sample", "Ewma", "ShrinkConstCorr"}) {
        StrategySpec spec;
        spec.window = 30;
        spec.rebalance = 30;
        spec.model = parse_model_name(name);
        const BacktestReport rep = run_backtest(data.prices, data.caps, spec);
        std::size_t k = 0;
        std::map<std::string, long long> holdings;
        for (std::size_t t = 0; t < rep.dates.size(); ++t) {
            if (k < rep.rebalances.size() && rep.rebalances[k].date == rep.dates[t]) {
                holdings.clear();
                for (std::size_t i = 0; i < rep.rebalances[k].universe.size(); ++i) {
                    holdings[rep.rebalances[k].universe[i]] = rep.rebalances[k].shares[i];
                }
                ++k;
            }
            const std::size_t row = *data.prices.date_index(rep.dates[t]);
            double value = rep.cash[t];
            for (const auto& [asset, n] : holdings) {
                value += static_cast<double>(n) * carried_price(data.prices, *data.prices.asset_index(asset), row);
            }
            worst_daily = std::max(worst_daily, std::abs(value - rep.equity[t]) / spec.initial_capital);
        }
        double notional = 0.0;
        double fees = 0.0;
        for (const auto& tr : rep.trades) {
            const double traded = static_cast<double>(std::llabs(tr.delta)) * tr.price;
            notional += traded;
            fees += tr.commission;
            worst_fee = std::max(worst_fee, std::abs(tr.commission - 0.005 * traded));
        }
        worst_fee = std::max({worst_fee, std::abs(fees - rep.commission_paid),
                              std::abs(rep.commission_paid - 0.005 * notional) / std::max(1.0, notional)});
        trades += rep.trades.size();
    }
    return {worst_identity <= 1e-9 && worst_daily <= 1e-9 && worst_fee <= 1e-12 && trades > 0,
            fmt::format("allocator identity {:.3g}, daily identity {:.3g} x capital, commission deviation "
                        "{:.3g} over {} trades",
                        worst_identity, worst_daily, worst_fee, trades)};
}

// 9, 10, 11 -----------------------------------------------------------------
ModelSpec smoke_lstm()
{
    ModelSpec m = parse_model_name("LSTM");
    m.train.hidden = {5};
    m.train.seq_len = 15;
    m.train.batch_size = 8;
    return m;
}

RunConfig smoke_config(const SynthPaths& paths, const fs::path& out)
{
    RunConfig cfg;
    cfg.prices = paths.prices;
    cfg.caps = paths.caps;
    cfg.classes = paths.classes;
    cfg.out = out;
    cfg.windows = {30, 60};
    cfg.rebalances = {30, 60};
    cfg.models = {parse_model_name("Sample"), parse_model_name("Ewma"), smoke_lstm()};
    cfg.seed = 42;
    cfg.jobs = 1;
    return cfg;
}

Outcome end_to_end(const RunConfig& cfg, const MarketData& data)
{
    const auto start = Clock::now();
    const auto outcomes = run_grid(cfg, data);
    const auto rows = write_grid_outputs(outcomes, cfg.out);
    const double secs = seconds_since(start);
    std::size_t ok = 0;
    bool positive = true;
    bool populated = true;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            spdlog::error("{} failed: {}", o.cell.run_id, o.error);
            continue;
        }
        ++ok;
        positive = positive && std::ranges::all_of(o.report->equity, [](double v) { return v > 0.0; });
    }
    for (const auto& r : rows) {
        populated = populated && r.arc && r.asd && r.mdd && r.mld && !r.status.empty();
        const CsvTable metrics = read_csv(cfg.out / "runs" / r.run_id / "metrics.csv");
        populated = populated && metrics.rows.size() >= 7;
        for (const auto& line : metrics.rows) {
            // Ratios are blank only when their denominator is zero.
            const bool ratio = line[0].rfind("IR", 0) == 0;
            populated = populated && (!line[1].empty() || ratio);
        }
    }
    const bool pass = outcomes.size() == 12 && ok == outcomes.size() && positive && populated && secs < 600.0;
    return {pass, fmt::format("{}/{} runs ok, equity positive: {}, metrics populated: {}, {:.1f}s", ok,
                              outcomes.size(), positive, populated, secs)};
}

Outcome determinism(RunConfig cfg, const MarketData& data, const fs::path& first)
{
    cfg.out = cfg.out.parent_path() / "grid_rerun";
    write_grid_outputs(run_grid(cfg, data), cfg.out);
    const bool same = slurp(first / "summary.csv") == slurp(cfg.out / "summary.csv");
    return {same && !slurp(first / "summary.csv").empty(),
            fmt::format("summary.csv byte-identical across reruns with seed {}: {}", cfg.seed, same)};
}

Outcome lstm_versus_persistence(RunConfig cfg, const MarketData& data, const SynthConfig& synth)
{
    cfg.models = {parse_model_name("Persistence")};
    cfg.out = cfg.out.parent_path() / "grid_persistence";
    const auto persistence = write_grid_outputs(run_grid(cfg, data), cfg.out);
    const auto smoke = read_summary(cfg.out.parent_path() / "grid" / "summary.csv");
    auto mean_ir = [](const std::vector<SummaryRow>& rows, const std::string& family) {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : rows) {
            if (r.family == family && r.status == "ok" && r.ir) {
                sum += *r.ir;
                ++n;
            }
        }
        return n > 0 ? sum / n : NAN;
    };
    const double lstm = mean_ir(smoke, "LSTM");
    const double base = mean_ir(persistence, "Persistence");
    return {lstm >= base, fmt::format("mean IR LSTM {:.4f} vs Persistence {:.4f} (synth seed {}, grid seed {})",
                                      lstm, base, synth.seed, cfg.seed)};
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_level(spdlog::level::warn);
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "covcast_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    const SynthConfig synth;
    const SynthPaths paths = write_synthetic(work / "synthetic", synth);
    RunConfig cfg = smoke_config(paths, work / "grid");
    const MarketData data = load_market_data(cfg);

    struct Criterion {
        int id;
        std::string name;
        bool blocking;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Cholesky round-trip", true, cholesky_round_trip},
        {2, "optimizer vs brute force", true, optimizer_brute_force},
        {3, "EWMA recursion vs unrolled sum", true, ewma_unrolled},
        {4, "oracle-approximating shrinkage", true, oracle_approx_convergence},
        {5, "LSTM gradient check", true, lstm_gradients},
        {6, "probabilistic heads", true, probabilistic_heads},
        {7, "metrics oracle", true, metrics_oracle},
        {8, "allocation and accounting", true, [&] { return allocation_and_accounting(data); }},
        {10, "end-to-end smoke grid", true, [&] { return end_to_end(cfg, data); }},
        {9, "grid determinism", true, [&] { return determinism(cfg, data, cfg.out); }},
        {11, "LSTM vs persistence mean IR", false, [&] { return lstm_versus_persistence(cfg, data, synth); }},
    };

    std::map<int, std::string> lines;
    bool failed = false;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        const std::string tag = o.pass ? "PASS" : (c.blocking ? "FAIL" : "INFO");
        lines[c.id] = fmt::format("[{}] {:2} {}: {}{}", tag, c.id, c.name, o.detail,
                                  c.blocking ? "" : " (non-blocking)");
        failed = failed || (c.blocking && !o.pass);
        std::cerr << "finished criterion " << c.id << '\n';
    }
    for (const auto& [id, line] : lines) {
        std::cout << line << '\n';
    }
    std::cout << (failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED") << '\n';
    return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
