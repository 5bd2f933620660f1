#include "covcast/synth.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/csv.hpp"
#include "covcast/rng.hpp"

namespace covcast {

namespace {

struct AssetParams {
    std::string ticker;
    bool stock = true;
    double beta = 1.0;
    double idio = 0.01;   ///< calm idiosyncratic daily vol
    double drift = 0.0003;
    double supply = 1e9;  ///< units outstanding, for caps
    double price = 100.0;
};

bool is_weekend(Date d)
{
    const std::chrono::weekday wd{d};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

} // namespace

SynthDataset generate_synthetic(const SynthConfig& cfg)
{
    if (cfg.days < 2 || cfg.n_stock + cfg.n_crypto == 0) {
        throw std::invalid_argument("synthetic data needs at least 2 days and 1 asset");
    }
    if (!(cfg.stay_probability > 0.0 && cfg.stay_probability < 1.0)) {
        throw std::invalid_argument("stay_probability must lie in (0, 1)");
    }
    Rng rng(derive_seed(cfg.seed, hash_name("synth")));

    std::vector<AssetParams> assets;
    for (std::size_t i = 0; i < cfg.n_stock; ++i) {
        AssetParams a;
        a.ticker = fmt::format("STK{}", i + 1);
        a.beta = rng.uniform(0.6, 1.2);
        a.idio = rng.uniform(0.006, 0.012);
        a.drift = rng.uniform(0.0001, 0.0005);
        a.supply = rng.uniform(2e8, 2e9);
        a.price = rng.uniform(40.0, 200.0);
        assets.push_back(a);
    }
    for (std::size_t i = 0; i < cfg.n_crypto; ++i) {
        AssetParams a;
        a.ticker = fmt::format("CRY{}", i + 1);
        a.stock = false;
        a.beta = rng.uniform(1.5, 3.0);
        a.idio = rng.uniform(0.02, 0.035);
        a.drift = rng.uniform(0.0, 0.001);
        a.supply = rng.uniform(1e7, 5e8);
        a.price = rng.uniform(1.0, 500.0);
        assets.push_back(a);
    }

    SynthDataset out;
    std::string header = "date";
    for (const auto& a : assets) {
        header += "," + a.ticker;
        out.classes_csv += fmt::format("{},{}\n", a.ticker, a.stock ? "stock" : "crypto");
    }
    out.classes_csv = "ticker,class\n" + out.classes_csv;
    out.prices_csv = header + "\n";
    out.caps_csv = header + "\n";

    int regime = 0;
    std::vector<double> price(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        price[i] = assets[i].price;
    }
    for (std::size_t t = 0; t < cfg.days; ++t) {
        if (t > 0) {
            if (rng.uniform() > cfg.stay_probability) {
                regime = 1 - regime;
            }
            const double vol_mult = regime == 1 ? 2.5 : 1.0;
            const double factor = (regime == 1 ? -0.001 : 0.0004) + vol_mult * 0.008 * rng.normal();
            for (std::size_t i = 0; i < assets.size(); ++i) {
                const AssetParams& a = assets[i];
                const double loading = a.beta * (regime == 1 ? 1.5 : 1.0);
                const double r = a.drift + loading * factor + vol_mult * a.idio * rng.normal();
                price[i] *= std::exp(std::max(r, -0.5));
            }
        }
        out.regimes.push_back(regime);
        const Date d = cfg.start + std::chrono::days(static_cast<long>(t));
        std::string prow = format_date(d);
        std::string crow = prow;
        for (std::size_t i = 0; i < assets.size(); ++i) {
            if (assets[i].stock && is_weekend(d) && t + 1 < cfg.days) {
                prow += ",";
                crow += ",";
                continue;
            }
            prow += "," + format_number(price[i]);
            crow += "," + format_number(price[i] * assets[i].supply);
        }
        out.prices_csv += prow + "\n";
        out.caps_csv += crow + "\n";
    }
    return out;
}

SynthPaths write_synthetic(const std::filesystem::path& dir, const SynthConfig& cfg)
{
    const SynthDataset data = generate_synthetic(cfg);
    SynthPaths paths{dir / "prices.csv", dir / "caps.csv", dir / "classes.csv"};
    write_text(paths.prices, data.prices_csv);
    write_text(paths.caps, data.caps_csv);
    write_text(paths.classes, data.classes_csv);
    std::string regimes = "date,regime\n";
    for (std::size_t t = 0; t < data.regimes.size(); ++t) {
        regimes += fmt::format("{},{}\n",
                               format_date(cfg.start + std::chrono::days(static_cast<long>(t))),
                               data.regimes[t]);
    }
    write_text(dir / "regimes.csv", regimes);
    return paths;
}

} // namespace covcast
