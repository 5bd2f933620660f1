#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covcast/csv.hpp"
#include "covcast/dates.hpp"

namespace covcast {

enum class AssetClass { Stock, Crypto };

AssetClass parse_asset_class(const std::string& text);
const char* to_string(AssetClass cls);

using ClassMap = std::map<std::string, AssetClass>;

/// Tickers dropped on load. Matching is case-insensitive.
std::set<std::string> default_stablecoins();

/// Daily close prices on a gap-free calendar. Missing cells are NaN and only
/// occur outside an asset's first..last quoted date.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    std::vector<AssetClass> classes;
    Eigen::MatrixXd prices; // dates x assets

    std::size_t rows() const { return dates.size(); }
    std::size_t cols() const { return assets.size(); }
    std::optional<std::size_t> asset_index(const std::string& ticker) const;
    std::optional<std::size_t> date_index(Date date) const;
    /// True when every price of `asset` in rows [first, last] is present.
    bool available(std::size_t asset, std::size_t first, std::size_t last) const;
};

struct ReturnsMatrix {
    std::vector<Date> dates; // date of the later price of each pair
    std::vector<std::string> assets;
    Eigen::MatrixXd values; // (T-1) x N simple returns
};

struct CapPanel {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    std::vector<AssetClass> classes;
    Eigen::MatrixXd caps; // NaN = missing
};

ClassMap load_class_map(const std::filesystem::path& path);

/// Builds a panel from a wide table (`date,<ticker>,...`). Dates may arrive in
/// any order; the calendar is made contiguous and each asset is filled forward
/// between its first and last quote.
PricePanel build_price_panel(const CsvTable& table, const ClassMap& class_map,
                             const std::set<std::string>& blocklist = default_stablecoins());

PricePanel load_price_panel(const std::filesystem::path& path, const ClassMap& class_map,
                            const std::set<std::string>& blocklist = default_stablecoins());

/// In-place last-observation-carried-forward restricted to each column's
/// first..last non-missing row.
void fill_forward(Eigen::MatrixXd& values);

CapPanel build_cap_panel(const CsvTable& table);
CapPanel load_cap_panel(const std::filesystem::path& path);

/// Reindexes caps onto the price panel's dates and assets; absent cells are NaN.
CapPanel align_caps(const CapPanel& caps, const PricePanel& panel);

/// Returns between consecutive price rows in [first_row, last_row] for the
/// given asset columns.
ReturnsMatrix compute_returns(const PricePanel& panel, const std::vector<std::size_t>& assets,
                              std::size_t first_row, std::size_t last_row);

/// Top `n_stock` stocks then top `n_crypto` cryptos by cap on `row`, each group
/// by descending cap with ties broken by ticker. When `eligible` is given, only
/// flagged assets compete. Throws DataError if a class has too few candidates.
std::vector<std::string> select_universe(const CapPanel& caps, std::size_t row,
                                         std::size_t n_stock, std::size_t n_crypto,
                                         const std::vector<bool>* eligible = nullptr);

/// Ranked candidates of one class without the count check.
std::vector<std::string> rank_by_cap(const CapPanel& caps, std::size_t row, AssetClass cls,
                                     const std::vector<bool>* eligible = nullptr);

} // namespace covcast
