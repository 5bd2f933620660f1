#include "covcast/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "covcast/errors.hpp"

namespace covcast {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string upper(std::string text)
{
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return text;
}

std::string trim(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

std::optional<double> parse_cell(const std::string& raw, const std::string& where)
{
    const std::string cell = trim(raw);
    if (cell.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw DataError(fmt::format("{}: malformed number '{}'", where, cell));
    }
    return value;
}

struct WideTable {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    Eigen::MatrixXd values;
};

// Parses a wide CSV onto a contiguous daily calendar; `keep` selects columns.
template <typename Keep, typename Check>
WideTable parse_wide(const CsvTable& table, Keep keep, Check check)
{
    if (table.header.empty() || upper(trim(table.header.front())) != "DATE") {
        throw DataError("first CSV column must be 'date'");
    }
    std::vector<std::size_t> columns;
    WideTable out;
    std::set<std::string> seen;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        const std::string ticker = trim(table.header[c]);
        if (ticker.empty()) {
            throw DataError(fmt::format("empty ticker in header column {}", c));
        }
        if (!seen.insert(ticker).second) {
            throw DataError(fmt::format("duplicate ticker '{}'", ticker));
        }
        if (keep(ticker)) {
            columns.push_back(c);
            out.assets.push_back(ticker);
        }
    }
    if (table.rows.empty()) {
        throw DataError("CSV has no data rows");
    }

    std::vector<std::pair<Date, std::size_t>> order;
    order.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        order.emplace_back(parse_date(trim(table.rows[r].front())), r);
    }
    std::sort(order.begin(), order.end());
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (order[k].first == order[k - 1].first) {
            throw DataError(fmt::format("duplicate date row {}", format_date(order[k].first)));
        }
    }

    const Date first = order.front().first;
    const auto span = static_cast<std::size_t>(days_between(first, order.back().first)) + 1;
    out.dates.reserve(span);
    for (std::size_t d = 0; d < span; ++d) {
        out.dates.push_back(first + std::chrono::days{static_cast<long>(d)});
    }
    out.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(span),
                                           static_cast<Eigen::Index>(columns.size()), kMissing);
    for (const auto& [date, r] : order) {
        const auto row = static_cast<Eigen::Index>(days_between(first, date));
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const std::string where =
                fmt::format("{} {}", format_date(date), out.assets[j]);
            if (const auto v = parse_cell(table.rows[r][columns[j]], where)) {
                check(*v, where);
                out.values(row, static_cast<Eigen::Index>(j)) = *v;
            }
        }
    }
    fill_forward(out.values);
    return out;
}

} // namespace

AssetClass parse_asset_class(const std::string& text)
{
    const std::string t = upper(trim(text));
    if (t == "STOCK") {
        return AssetClass::Stock;
    }
    if (t == "CRYPTO") {
        return AssetClass::Crypto;
    }
    throw DataError(fmt::format("unknown asset class '{}'", text));
}

const char* to_string(AssetClass cls)
{
    return cls == AssetClass::Stock ? "stock" : "crypto";
}

std::set<std::string> default_stablecoins()
{
    return {"USDT", "USDC", "BUSD", "DAI", "TUSD", "USDP", "PAX", "GUSD", "HUSD",
            "UST",  "USTC", "USDN", "FRAX", "LUSD", "SUSD", "USDD", "FEI"};
}

std::optional<std::size_t> PricePanel::asset_index(const std::string& ticker) const
{
    const auto it = std::find(assets.begin(), assets.end(), ticker);
    if (it == assets.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - assets.begin());
}

std::optional<std::size_t> PricePanel::date_index(Date date) const
{
    if (dates.empty() || date < dates.front() || date > dates.back()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(days_between(dates.front(), date));
}

bool PricePanel::available(std::size_t asset, std::size_t first, std::size_t last) const
{
    if (asset >= cols() || last >= rows() || first > last) {
        return false;
    }
    const auto col = prices.col(static_cast<Eigen::Index>(asset));
    for (std::size_t t = first; t <= last; ++t) {
        if (std::isnan(col(static_cast<Eigen::Index>(t)))) {
            return false;
        }
    }
    return true;
}

ClassMap load_class_map(const std::filesystem::path& path)
{
    const CsvTable table = read_csv(path);
    if (table.header.size() != 2) {
        throw DataError(fmt::format("{}: expected header 'ticker,class'", path.string()));
    }
    ClassMap map;
    for (const auto& row : table.rows) {
        const std::string ticker = trim(row[0]);
        if (!map.emplace(ticker, parse_asset_class(row[1])).second) {
            throw DataError(fmt::format("{}: duplicate ticker '{}'", path.string(), ticker));
        }
    }
    return map;
}

void fill_forward(Eigen::MatrixXd& values)
{
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        Eigen::Index first = -1;
        Eigen::Index last = -1;
        for (Eigen::Index t = 0; t < values.rows(); ++t) {
            if (!std::isnan(values(t, j))) {
                if (first < 0) {
                    first = t;
                }
                last = t;
            }
        }
        for (Eigen::Index t = first + 1; first >= 0 && t <= last; ++t) {
            if (std::isnan(values(t, j))) {
                values(t, j) = values(t - 1, j);
            }
        }
    }
}

PricePanel build_price_panel(const CsvTable& table, const ClassMap& class_map,
                             const std::set<std::string>& blocklist)
{
    std::set<std::string> blocked;
    for (const auto& b : blocklist) {
        blocked.insert(upper(b));
    }
    auto wide = parse_wide(
        table, [&](const std::string& ticker) { return !blocked.contains(upper(ticker)); },
        [](double v, const std::string& where) {
            if (v <= 0.0) {
                throw DataError(fmt::format("{}: non-positive price {}", where, v));
            }
        });
    PricePanel panel;
    panel.dates = std::move(wide.dates);
    panel.assets = std::move(wide.assets);
    panel.prices = std::move(wide.values);
    for (const auto& ticker : panel.assets) {
        const auto it = class_map.find(ticker);
        if (it == class_map.end()) {
            throw DataError(fmt::format("no asset class for ticker '{}'", ticker));
        }
        panel.classes.push_back(it->second);
    }
    return panel;
}

PricePanel load_price_panel(const std::filesystem::path& path, const ClassMap& class_map,
                            const std::set<std::string>& blocklist)
{
    return build_price_panel(read_csv(path), class_map, blocklist);
}

CapPanel build_cap_panel(const CsvTable& table)
{
    auto wide = parse_wide(
        table, [](const std::string&) { return true; },
        [](double v, const std::string& where) {
            if (v < 0.0) {
                throw DataError(fmt::format("{}: negative market cap {}", where, v));
            }
        });
    CapPanel caps;
    caps.dates = std::move(wide.dates);
    caps.assets = std::move(wide.assets);
    caps.caps = std::move(wide.values);
    return caps;
}

CapPanel load_cap_panel(const std::filesystem::path& path)
{
    return build_cap_panel(read_csv(path));
}

CapPanel align_caps(const CapPanel& caps, const PricePanel& panel)
{
    CapPanel out;
    out.dates = panel.dates;
    out.assets = panel.assets;
    out.classes = panel.classes;
    out.caps = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(panel.rows()),
                                         static_cast<Eigen::Index>(panel.cols()), kMissing);
    if (caps.dates.empty()) {
        return out;
    }
    for (std::size_t j = 0; j < panel.cols(); ++j) {
        const auto it = std::find(caps.assets.begin(), caps.assets.end(), panel.assets[j]);
        if (it == caps.assets.end()) {
            continue;
        }
        const auto src_col = static_cast<Eigen::Index>(it - caps.assets.begin());
        for (std::size_t t = 0; t < panel.rows(); ++t) {
            const long offset = days_between(caps.dates.front(), panel.dates[t]);
            if (offset < 0 || offset >= static_cast<long>(caps.dates.size())) {
                continue;
            }
            out.caps(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                caps.caps(offset, src_col);
        }
    }
    return out;
}

ReturnsMatrix compute_returns(const PricePanel& panel, const std::vector<std::size_t>& assets,
                              std::size_t first_row, std::size_t last_row)
{
    if (last_row <= first_row || last_row >= panel.rows()) {
        throw DataError(fmt::format("invalid return range [{}, {}] on a {}-row panel", first_row,
                                    last_row, panel.rows()));
    }
    ReturnsMatrix out;
    const auto n_rows = static_cast<Eigen::Index>(last_row - first_row);
    out.values.resize(n_rows, static_cast<Eigen::Index>(assets.size()));
    for (std::size_t t = first_row + 1; t <= last_row; ++t) {
        out.dates.push_back(panel.dates[t]);
    }
    for (std::size_t j = 0; j < assets.size(); ++j) {
        const std::size_t a = assets[j];
        if (!panel.available(a, first_row, last_row)) {
            throw DataError(fmt::format("asset '{}' unavailable between {} and {}",
                                        a < panel.cols() ? panel.assets[a] : std::to_string(a),
                                        format_date(panel.dates[first_row]),
                                        format_date(panel.dates[last_row])));
        }
        out.assets.push_back(panel.assets[a]);
        for (Eigen::Index t = 0; t < n_rows; ++t) {
            const auto row = static_cast<Eigen::Index>(first_row) + t;
            out.values(t, static_cast<Eigen::Index>(j)) =
                panel.prices(row + 1, static_cast<Eigen::Index>(a)) /
                    panel.prices(row, static_cast<Eigen::Index>(a)) -
                1.0;
        }
    }
    return out;
}

std::vector<std::string> rank_by_cap(const CapPanel& caps, std::size_t row, AssetClass cls,
                                     const std::vector<bool>* eligible)
{
    if (row >= caps.dates.size()) {
        throw DataError(fmt::format("cap row {} out of range", row));
    }
    std::vector<std::pair<double, const std::string*>> candidates;
    for (std::size_t j = 0; j < caps.assets.size(); ++j) {
        if (caps.classes.size() != caps.assets.size()) {
            throw DataError("cap panel has no asset classes; align it to a price panel first");
        }
        if (caps.classes[j] != cls || (eligible != nullptr && !(*eligible)[j])) {
            continue;
        }
        const double cap = caps.caps(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
        if (!std::isnan(cap)) {
            candidates.emplace_back(cap, &caps.assets[j]);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return *a.second < *b.second;
    });
    std::vector<std::string> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        out.push_back(*c.second);
    }
    return out;
}

std::vector<std::string> select_universe(const CapPanel& caps, std::size_t row,
                                         std::size_t n_stock, std::size_t n_crypto,
                                         const std::vector<bool>* eligible)
{
    auto stocks = rank_by_cap(caps, row, AssetClass::Stock, eligible);
    auto cryptos = rank_by_cap(caps, row, AssetClass::Crypto, eligible);
    if (stocks.size() < n_stock || cryptos.size() < n_crypto) {
        throw DataError(fmt::format(
            "insufficient assets on {}: {} stocks (need {}), {} cryptos (need {})",
            format_date(caps.dates[row]), stocks.size(), n_stock, cryptos.size(), n_crypto));
    }
    std::vector<std::string> out(stocks.begin(), stocks.begin() + static_cast<long>(n_stock));
    out.insert(out.end(), cryptos.begin(), cryptos.begin() + static_cast<long>(n_crypto));
    return out;
}

} // namespace covcast
