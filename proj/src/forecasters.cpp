#include "covcast/forecasters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/errors.hpp"
#include "covcast/likelihood.hpp"

namespace covcast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

constexpr double kSigmaFloor = 1e-6;
constexpr std::uint64_t kForecastStream = 0xF0CA57;

void check_length(const MatrixXd& series, const TrainConfig& cfg)
{
    const auto need = cfg.seq_len + cfg.validation_len + 1;
    if (static_cast<std::size_t>(series.rows()) < need) {
        throw std::invalid_argument(fmt::format(
            "series of length {} too short: need seq_len + validation_len + 1 = {}",
            series.rows(), need));
    }
    if (series.cols() < 1) {
        throw std::invalid_argument("series has no columns");
    }
}

MatrixXd last_window(const MatrixXd& data, std::size_t seq_len)
{
    if (data.rows() < static_cast<Index>(seq_len)) {
        throw std::invalid_argument(
            fmt::format("forecast needs {} rows of history, got {}", seq_len, data.rows()));
    }
    return data.bottomRows(static_cast<Index>(seq_len));
}

MatrixXd window_before(const MatrixXd& data, std::size_t target, std::size_t seq_len)
{
    return data.middleRows(static_cast<Index>(target - seq_len), static_cast<Index>(seq_len));
}

std::vector<Index> hidden_layers(const ProbConfig& prob)
{
    return std::vector<Index>(prob.layers, static_cast<Index>(prob.hidden));
}

// σ = softplus(raw) + floor; returns variance σ² and dσ²/draw.
void scale_to_variance(const VectorXd& raw, VectorXd& variance, VectorXd& d_raw)
{
    variance.resize(raw.size());
    d_raw.resize(raw.size());
    for (Index i = 0; i < raw.size(); ++i) {
        const double sigma = softplus(raw(i)) + kSigmaFloor;
        variance(i) = sigma * sigma;
        d_raw(i) = 2.0 * sigma * sigmoid(raw(i));
    }
}

GaussianNll joint_nll(const VectorXd& z, const Predictive& p)
{
    return p.factor.cols() > 0 ? lowrank_gaussian_nll(z, p.mean, p.variance, p.factor)
                               : diagonal_gaussian_nll(z, p.mean, p.variance);
}

template <typename Forecaster>
VectorXd sample_forecast(const Forecaster& f, const Predictive& p)
{
    Rng rng(derive_seed(f.config.seed, kForecastStream));
    const auto draws = static_cast<Index>(f.prob.mc_samples);
    MatrixXd samples(draws, p.mean.size());
    for (Index s = 0; s < draws; ++s) {
        const VectorXd z = sample_lowrank_gaussian(p.mean, p.variance, p.factor, rng);
        for (Index i = 0; i < z.size(); ++i) {
            samples(s, i) = f.transform.inverse(z(i), static_cast<std::size_t>(i));
        }
    }
    return sample_median(samples);
}

} // namespace

void TrainConfig::validate() const
{
    if (epochs < 1 || batch_size < 1 || seq_len < 1 || hidden.empty()) {
        throw std::invalid_argument("epochs, batch_size, seq_len and hidden must be >= 1");
    }
    if (std::any_of(hidden.begin(), hidden.end(), [](Index h) { return h < 1; })) {
        throw std::invalid_argument("hidden layer sizes must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be positive");
    }
}

void ProbConfig::validate(std::size_t series) const
{
    if (hidden < 1 || layers < 1 || mc_samples < 1) {
        throw std::invalid_argument("hidden, layers and mc_samples must be >= 1");
    }
    if (low_rank && rank >= series && series > 0) {
        throw std::invalid_argument(
            fmt::format("low-rank rank {} must be below the series count {}", rank, series));
    }
}

TrainHistory train_loop(ParameterSet& params, std::size_t rows, const TrainConfig& cfg,
                        const SampleLoss& loss, Rng& rng, bool keep_best)
{
    cfg.validate();
    if (rows < cfg.seq_len + cfg.validation_len + 1) {
        throw std::invalid_argument("series too short for the training configuration");
    }
    const std::size_t split = rows - cfg.validation_len;
    std::vector<std::size_t> order(split - cfg.seq_len);
    std::iota(order.begin(), order.end(), cfg.seq_len);

    Adam adam(params.size(), cfg.learning_rate);
    VectorXd grad = params.zeros();
    TrainHistory history;
    VectorXd best = params.values();
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            grad.setZero();
            for (std::size_t k = start; k < stop; ++k) {
                total += loss(order[k], &grad, rng);
            }
            grad /= static_cast<double>(stop - start);
            if (!grad.allFinite()) {
                throw RunError(fmt::format("training diverged at epoch {}", epoch + 1));
            }
            adam.step(params.values(), grad);
        }
        const double train = total / static_cast<double>(order.size());
        double val = std::numeric_limits<double>::quiet_NaN();
        if (cfg.validation_len > 0) {
            val = 0.0;
            for (std::size_t t = split; t < rows; ++t) {
                val += loss(t, nullptr, rng);
            }
            val /= static_cast<double>(cfg.validation_len);
        }
        if (!std::isfinite(train) || (cfg.validation_len > 0 && !std::isfinite(val))) {
            throw RunError(fmt::format("training loss became non-finite at epoch {}", epoch + 1));
        }
        history.train_loss.push_back(train);
        history.val_loss.push_back(val);
        const double score = cfg.validation_len > 0 ? val : train;
        if (!keep_best || score < best_score) {
            best_score = score;
            history.best_epoch = epoch + 1;
            if (keep_best) {
                best = params.values();
            }
        }
    }
    if (keep_best) {
        params.values() = best;
    }
    return history;
}

VectorXd sample_median(const MatrixXd& samples)
{
    if (samples.rows() < 1) {
        throw std::invalid_argument("sample_median: no samples");
    }
    VectorXd out(samples.cols());
    std::vector<double> column(static_cast<std::size_t>(samples.rows()));
    const std::size_t n = column.size();
    for (Index j = 0; j < samples.cols(); ++j) {
        for (std::size_t s = 0; s < n; ++s) {
            column[s] = samples(static_cast<Index>(s), j);
        }
        std::sort(column.begin(), column.end());
        out(j) = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return out;
}

// -- LSTM ---------------------------------------------------------------------

LstmForecaster lstm_train(const MatrixXd& series, const TrainConfig& cfg)
{
    cfg.validate();
    check_length(series, cfg);
    LstmForecaster out{LstmModel(series.cols(), cfg.hidden), cfg, {}};
    Rng rng(cfg.seed);
    out.model.stack.initialize(out.model.params, rng);
    out.model.head.initialize(out.model.params, rng);
    const SampleLoss loss = [&](std::size_t t, VectorXd* grad, Rng&) {
        return lstm_loss(out.model, window_before(series, t, cfg.seq_len),
                         series.row(static_cast<Index>(t)).transpose(), grad);
    };
    out.history = train_loop(out.model.params, static_cast<std::size_t>(series.rows()), cfg, loss, rng);
    return out;
}

VectorXd lstm_forecast(const LstmForecaster& forecaster, const MatrixXd& series)
{
    const VectorXd y = lstm_forward(forecaster.model, last_window(series, forecaster.config.seq_len));
    if (!y.allFinite()) {
        throw RunError("LSTM forecast is not finite");
    }
    return y;
}

// -- DeepVAR --------------------------------------------------------------------

DeepVarModel::DeepVarModel(std::size_t n_series, const ProbConfig& prob)
    : series(n_series), rank(prob.effective_rank())
{
    const auto m = static_cast<Index>(n_series);
    stack = LstmStack(params, m, hidden_layers(prob));
    const Index h = stack.output_size();
    mean_head = Linear(params, h, m, "mu");
    scale_head = Linear(params, h, m, "sigma");
    factor_head = Linear(params, h, m * static_cast<Index>(rank), "factor");
}

Predictive deepvar_predict(const DeepVarModel& model, const MatrixXd& window)
{
    const VectorXd h = model.stack.forward(model.params, window);
    Predictive p;
    p.mean = model.mean_head.forward(model.params, h);
    VectorXd d_raw;
    scale_to_variance(model.scale_head.forward(model.params, h), p.variance, d_raw);
    const VectorXd f = model.factor_head.forward(model.params, h);
    p.factor = Eigen::Map<const RowMajorMatrix>(f.data(), static_cast<Index>(model.series),
                                                static_cast<Index>(model.rank));
    return p;
}

double deepvar_nll(const DeepVarModel& model, const MatrixXd& window, const VectorXd& target,
                   VectorXd* grad)
{
    LstmTrace trace;
    const VectorXd h = model.stack.forward(model.params, window, grad ? &trace : nullptr);
    Predictive p;
    p.mean = model.mean_head.forward(model.params, h);
    const VectorXd raw = model.scale_head.forward(model.params, h);
    VectorXd d_var_d_raw;
    scale_to_variance(raw, p.variance, d_var_d_raw);
    const VectorXd f = model.factor_head.forward(model.params, h);
    p.factor = Eigen::Map<const RowMajorMatrix>(f.data(), static_cast<Index>(model.series),
                                                static_cast<Index>(model.rank));
    const GaussianNll nll = joint_nll(target, p);
    const double m = static_cast<double>(model.series);
    if (grad != nullptr) {
        VectorXd dh = model.mean_head.backward(model.params, h, nll.d_mean / m, *grad);
        dh += model.scale_head.backward(model.params, h,
                                        nll.d_variance.cwiseProduct(d_var_d_raw) / m, *grad);
        if (model.rank > 0) {
            const RowMajorMatrix d_factor = nll.d_factor / m;
            const VectorXd flat = Eigen::Map<const VectorXd>(d_factor.data(), d_factor.size());
            dh += model.factor_head.backward(model.params, h, flat, *grad);
        }
        model.stack.backward(model.params, trace, dh, *grad);
    }
    return nll.value / m;
}

DeepVarForecaster deepvar_train(const MatrixXd& series, const TrainConfig& cfg, const ProbConfig& prob)
{
    cfg.validate();
    prob.validate(static_cast<std::size_t>(series.cols()));
    check_length(series, cfg);
    const Index train_rows = series.rows() - static_cast<Index>(cfg.validation_len);
    DeepVarForecaster out;
    out.config = cfg;
    out.prob = prob;
    out.transform = SeriesTransform(series.topRows(train_rows), prob.scaling, prob.copula);
    out.model = DeepVarModel(static_cast<std::size_t>(series.cols()), prob);
    const MatrixXd data = out.transform.forward(series);
    Rng rng(cfg.seed);
    out.model.stack.initialize(out.model.params, rng);
    out.model.mean_head.initialize(out.model.params, rng);
    out.model.scale_head.initialize(out.model.params, rng);
    out.model.factor_head.initialize(out.model.params, rng);
    const SampleLoss loss = [&](std::size_t t, VectorXd* grad, Rng&) {
        return deepvar_nll(out.model, window_before(data, t, cfg.seq_len),
                           data.row(static_cast<Index>(t)).transpose(), grad);
    };
    out.history = train_loop(out.model.params, static_cast<std::size_t>(series.rows()), cfg, loss, rng,
                             true);
    return out;
}

VectorXd deepvar_forecast(const DeepVarForecaster& forecaster, const MatrixXd& series)
{
    const MatrixXd data = forecaster.transform.forward(series);
    const Predictive p = deepvar_predict(forecaster.model, last_window(data, forecaster.config.seq_len));
    const VectorXd out = sample_forecast(forecaster, p);
    if (!out.allFinite()) {
        throw RunError("DeepVAR forecast is not finite");
    }
    return out;
}

// -- GPVAR ----------------------------------------------------------------------

GpVarModel::GpVarModel(std::size_t n_series, const ProbConfig& prob)
    : series(n_series), rank(prob.effective_rank())
{
    const auto e = static_cast<Index>(prob.embedding_dim);
    embedding = params.add("embedding", static_cast<Index>(n_series), e);
    stack = LstmStack(params, 1 + e, hidden_layers(prob));
    const Index h = stack.output_size();
    mean_head = Linear(params, h, 1, "mu");
    scale_head = Linear(params, h, 1, "sigma");
    factor_head = Linear(params, h, static_cast<Index>(rank), "factor");
}

namespace {

MatrixXd series_input(const GpVarModel& model, const MatrixXd& window, Index i)
{
    const auto emb = model.params.block(model.embedding);
    MatrixXd seq(window.rows(), 1 + emb.cols());
    seq.col(0) = window.col(i);
    for (Index t = 0; t < window.rows(); ++t) {
        seq.row(t).tail(emb.cols()) = emb.row(i);
    }
    return seq;
}

std::vector<Index> all_series(std::size_t n)
{
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    return idx;
}

} // namespace

Predictive gpvar_predict(const GpVarModel& model, const MatrixXd& window)
{
    const auto m = static_cast<Index>(model.series);
    const auto r = static_cast<Index>(model.rank);
    Predictive p{VectorXd(m), VectorXd(m), MatrixXd(m, r)};
    for (Index i = 0; i < m; ++i) {
        const VectorXd h = model.stack.forward(model.params, series_input(model, window, i));
        p.mean(i) = model.mean_head.forward(model.params, h)(0);
        const double sigma = softplus(model.scale_head.forward(model.params, h)(0)) + kSigmaFloor;
        p.variance(i) = sigma * sigma;
        if (r > 0) {
            p.factor.row(i) = model.factor_head.forward(model.params, h).transpose();
        }
    }
    return p;
}

double gpvar_nll(const GpVarModel& model, const MatrixXd& window, const VectorXd& target,
                 VectorXd* grad, const std::vector<Index>* subset)
{
    const std::vector<Index> everything = subset ? std::vector<Index>{} : all_series(model.series);
    const std::vector<Index>& idx = subset ? *subset : everything;
    const auto k = static_cast<Index>(idx.size());
    const auto r = static_cast<Index>(model.rank);
    std::vector<LstmTrace> traces(grad ? idx.size() : 0);
    std::vector<VectorXd> hidden(idx.size());
    Predictive p{VectorXd(k), VectorXd(k), MatrixXd(k, r)};
    VectorXd raw(k);
    VectorXd z(k);
    for (Index s = 0; s < k; ++s) {
        const Index i = idx[static_cast<std::size_t>(s)];
        hidden[static_cast<std::size_t>(s)] = model.stack.forward(
            model.params, series_input(model, window, i),
            grad ? &traces[static_cast<std::size_t>(s)] : nullptr);
        const VectorXd& h = hidden[static_cast<std::size_t>(s)];
        p.mean(s) = model.mean_head.forward(model.params, h)(0);
        raw(s) = model.scale_head.forward(model.params, h)(0);
        if (r > 0) {
            p.factor.row(s) = model.factor_head.forward(model.params, h).transpose();
        }
        z(s) = target(i);
    }
    VectorXd d_var_d_raw;
    scale_to_variance(raw, p.variance, d_var_d_raw);
    const GaussianNll nll = joint_nll(z, p);
    const double scale = 1.0 / static_cast<double>(k);
    if (grad != nullptr) {
        auto g_emb = model.params.view(*grad, model.embedding);
        for (Index s = 0; s < k; ++s) {
            const auto su = static_cast<std::size_t>(s);
            const VectorXd& h = hidden[su];
            VectorXd dh = model.mean_head.backward(
                model.params, h, VectorXd::Constant(1, nll.d_mean(s) * scale), *grad);
            dh += model.scale_head.backward(
                model.params, h,
                VectorXd::Constant(1, nll.d_variance(s) * d_var_d_raw(s) * scale), *grad);
            if (r > 0) {
                dh += model.factor_head.backward(model.params, h,
                                                 nll.d_factor.row(s).transpose() * scale, *grad);
            }
            MatrixXd d_seq;
            model.stack.backward(model.params, traces[su], dh, *grad, &d_seq);
            g_emb.row(idx[su]) += d_seq.rightCols(g_emb.cols()).colwise().sum();
        }
    }
    return nll.value * scale;
}

GpVarForecaster gpvar_train(const MatrixXd& series, const TrainConfig& cfg, const ProbConfig& prob)
{
    cfg.validate();
    prob.validate(static_cast<std::size_t>(series.cols()));
    check_length(series, cfg);
    const Index train_rows = series.rows() - static_cast<Index>(cfg.validation_len);
    GpVarForecaster out;
    out.config = cfg;
    out.prob = prob;
    out.transform = SeriesTransform(series.topRows(train_rows), prob.scaling, prob.copula);
    out.model = GpVarModel(static_cast<std::size_t>(series.cols()), prob);
    const MatrixXd data = out.transform.forward(series);
    Rng rng(cfg.seed);
    {
        auto emb = out.model.params.block(out.model.embedding);
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(emb.cols(), 1)));
        for (Index k = 0; k < emb.size(); ++k) {
            emb.data()[k] = rng.uniform(-bound, bound);
        }
    }
    out.model.stack.initialize(out.model.params, rng);
    out.model.mean_head.initialize(out.model.params, rng);
    out.model.scale_head.initialize(out.model.params, rng);
    out.model.factor_head.initialize(out.model.params, rng);

    const std::size_t m = out.model.series;
    const bool subsample = prob.series_subset > 0 && prob.series_subset < m;
    std::vector<Index> pool = all_series(m);
    const SampleLoss loss = [&](std::size_t t, VectorXd* grad, Rng& sample_rng) {
        const MatrixXd window = window_before(data, t, cfg.seq_len);
        const VectorXd target = data.row(static_cast<Index>(t)).transpose();
        if (grad != nullptr && subsample) {
            sample_rng.shuffle(std::span<Index>(pool));
            std::vector<Index> subset(pool.begin(), pool.begin() + static_cast<long>(prob.series_subset));
            std::sort(subset.begin(), subset.end());
            return gpvar_nll(out.model, window, target, grad, &subset);
        }
        return gpvar_nll(out.model, window, target, grad);
    };
    out.history = train_loop(out.model.params, static_cast<std::size_t>(series.rows()), cfg, loss, rng,
                             true);
    return out;
}

VectorXd gpvar_forecast(const GpVarForecaster& forecaster, const MatrixXd& series)
{
    const MatrixXd data = forecaster.transform.forward(series);
    const Predictive p = gpvar_predict(forecaster.model, last_window(data, forecaster.config.seq_len));
    const VectorXd out = sample_forecast(forecaster, p);
    if (!out.allFinite()) {
        throw RunError("GPVAR forecast is not finite");
    }
    return out;
}

VectorXd persistence_forecast(const MatrixXd& series)
{
    if (series.rows() < 1) {
        throw std::invalid_argument("persistence_forecast: empty series");
    }
    return series.row(series.rows() - 1).transpose();
}

} // namespace covcast
