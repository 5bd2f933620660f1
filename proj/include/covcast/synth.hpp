#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "covcast/dates.hpp"

namespace covcast {

struct SynthConfig {
    std::size_t days = 600;
    std::size_t n_stock = 3;
    std::size_t n_crypto = 3;
    std::uint64_t seed = 7;
    Date start = parse_date("2019-01-01");
    double stay_probability = 0.985; ///< daily persistence of the volatility regime
};

/// Market with a two-state (calm / turbulent) Markov volatility regime and a
/// common factor whose loading strengthens in turbulence. Stocks are not
/// quoted on weekends, except on the final day so they stay investable.
struct SynthDataset {
    std::string prices_csv;
    std::string caps_csv;
    std::string classes_csv;
    std::vector<int> regimes; ///< 0 calm, 1 turbulent, one per day
};

SynthDataset generate_synthetic(const SynthConfig& cfg);

struct SynthPaths {
    std::filesystem::path prices, caps, classes;
};

/// Writes prices.csv, caps.csv, classes.csv and regimes.csv into `dir`.
SynthPaths write_synthetic(const std::filesystem::path& dir, const SynthConfig& cfg);

} // namespace covcast
