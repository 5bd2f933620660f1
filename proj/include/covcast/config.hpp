#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "covcast/backtest.hpp"

namespace covcast {

struct RunConfig {
    std::filesystem::path prices;
    std::filesystem::path caps;
    std::filesystem::path classes;
    std::filesystem::path out = "out";
    std::vector<std::size_t> windows{30, 60, 90, 120};
    std::vector<std::size_t> rebalances{30, 60, 90, 120};
    std::vector<ModelSpec> models;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    double initial_capital = 100000.0;
    double commission = 0.005;
    std::size_t n_stock = 10;
    std::size_t n_crypto = 10;
    std::size_t train_multiple = 2;
    /// Start every strategy with the same window on the same date, the first
    /// one feasible for the most history-hungry model of that window.
    bool align_start = true;

    /// Grid shape and value checks; throws std::invalid_argument.
    void validate() const;
    /// Also checks that the data files exist; throws DataError.
    void validate_paths() const;
};

/// The seven classical estimators with default parameters.
std::vector<ModelSpec> classical_models();
/// LSTM grid: 10 architectures × batch {8, 16} × sequence length {15, 20}.
std::vector<ModelSpec> lstm_models();
/// DeepVAR or GPVAR grid: units {5..20} × scaling × low rank × copula.
std::vector<ModelSpec> probabilistic_models(ModelFamily family);
/// Named grid: classical, lstm, deepvar, gpvar.
std::vector<ModelSpec> preset_models(const std::string& name);

/// Accepts an estimator name (`sample`, `ewma`, ...) or a family name
/// (`persistence`, `lstm`, `deepvar`, `gpvar`) with default settings.
ModelSpec parse_model_name(const std::string& name);
ModelSpec parse_model_spec(const nlohmann::json& j);
nlohmann::json model_spec_json(const ModelSpec& model);

/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace covcast
