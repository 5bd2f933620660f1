#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "covcast/copula.hpp"
#include "covcast/lstm.hpp"
#include "covcast/parameters.hpp"
#include "covcast/rng.hpp"

namespace covcast {

struct TrainConfig {
    std::size_t epochs = 150;
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::size_t seq_len = 20;
    std::vector<Eigen::Index> hidden{20};
    std::uint64_t seed = 0;
    std::size_t validation_len = 0; ///< trailing targets held out

    void validate() const;
};

struct ProbConfig {
    std::size_t hidden = 10; ///< units per layer
    std::size_t layers = 2;
    bool scaling = false;
    bool copula = false;
    bool low_rank = false;
    std::size_t rank = 2;
    std::size_t mc_samples = 100;
    /// GPVAR only: series drawn per training sample, 0 = all.
    std::size_t series_subset = 0;
    /// GPVAR only: width of the learned per-series embedding.
    std::size_t embedding_dim = 3;

    std::size_t effective_rank() const { return low_rank ? rank : 0; }
    void validate(std::size_t series) const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::size_t best_epoch = 0; ///< 1-based epoch whose parameters were kept
};

/// Loss of the sample whose target is row `target` (inputs are the `seq_len`
/// rows before it). Accumulates the gradient into `grad` when non-null.
using SampleLoss = std::function<double(std::size_t target, Eigen::VectorXd* grad, Rng& rng)>;

/// Minibatch ADAM over sliding windows. Training targets are rows
/// [seq_len, rows - validation_len); the remaining rows are validation targets.
/// Throws RunError when the loss becomes non-finite. With `keep_best` the
/// parameters of the epoch with the lowest validation loss (training loss
/// when nothing is held out) are restored at the end; otherwise the last
/// epoch's parameters are kept.
TrainHistory train_loop(ParameterSet& params, std::size_t rows, const TrainConfig& cfg,
                        const SampleLoss& loss, Rng& rng, bool keep_best = false);

/// Row-wise median over Monte Carlo samples (samples x entries).
Eigen::VectorXd sample_median(const Eigen::MatrixXd& samples);

// -- LSTM ---------------------------------------------------------------------

struct LstmForecaster {
    LstmModel model;
    TrainConfig config;
    TrainHistory history;
};

LstmForecaster lstm_train(const Eigen::MatrixXd& series, const TrainConfig& cfg);

/// One-step forecast from the last `seq_len` rows of `series`.
Eigen::VectorXd lstm_forecast(const LstmForecaster& forecaster, const Eigen::MatrixXd& series);

// -- Probabilistic models -------------------------------------------------------

/// Predictive distribution N(mean, diag(variance) + factor factorᵀ).
struct Predictive {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
    Eigen::MatrixXd factor; // M x r
};

/// LSTM trunk over the joint M-vector with Gaussian heads: mean, σ via
/// softplus + 1e-6 (variance σ²), and an optional M x r low-rank factor.
struct DeepVarModel {
    ParameterSet params;
    LstmStack stack;
    Linear mean_head;
    Linear scale_head;
    Linear factor_head;
    std::size_t series = 0;
    std::size_t rank = 0;

    DeepVarModel() = default;
    DeepVarModel(std::size_t series, const ProbConfig& prob);
};

Predictive deepvar_predict(const DeepVarModel& model, const Eigen::MatrixXd& window);
double deepvar_nll(const DeepVarModel& model, const Eigen::MatrixXd& window,
                   const Eigen::VectorXd& target, Eigen::VectorXd* grad = nullptr);

/// One LSTM shared across series. Series i is unrolled on its own scalar
/// history concatenated with a learned embedding; per-series heads give the
/// mean, diagonal variance and row i of the low-rank factor.
struct GpVarModel {
    ParameterSet params;
    ParameterSet::BlockId embedding = 0; // series x embedding_dim
    LstmStack stack;
    Linear mean_head;
    Linear scale_head;
    Linear factor_head;
    std::size_t series = 0;
    std::size_t rank = 0;

    GpVarModel() = default;
    GpVarModel(std::size_t series, const ProbConfig& prob);
};

Predictive gpvar_predict(const GpVarModel& model, const Eigen::MatrixXd& window);
/// Joint NLL over `subset` of the series (all when null).
double gpvar_nll(const GpVarModel& model, const Eigen::MatrixXd& window,
                 const Eigen::VectorXd& target, Eigen::VectorXd* grad = nullptr,
                 const std::vector<Eigen::Index>* subset = nullptr);

struct DeepVarForecaster {
    DeepVarModel model;
    SeriesTransform transform;
    TrainConfig config;
    ProbConfig prob;
    TrainHistory history;
};

struct GpVarForecaster {
    GpVarModel model;
    SeriesTransform transform;
    TrainConfig config;
    ProbConfig prob;
    TrainHistory history;
};

DeepVarForecaster deepvar_train(const Eigen::MatrixXd& series, const TrainConfig& cfg,
                                const ProbConfig& prob);
GpVarForecaster gpvar_train(const Eigen::MatrixXd& series, const TrainConfig& cfg,
                            const ProbConfig& prob);

/// Median of `mc_samples` one-step draws, mapped back to the original scale.
Eigen::VectorXd deepvar_forecast(const DeepVarForecaster& forecaster, const Eigen::MatrixXd& series);
Eigen::VectorXd gpvar_forecast(const GpVarForecaster& forecaster, const Eigen::MatrixXd& series);

/// Last observed row.
Eigen::VectorXd persistence_forecast(const Eigen::MatrixXd& series);

} // namespace covcast
