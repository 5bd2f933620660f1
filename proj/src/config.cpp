#include "covcast/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/errors.hpp"

namespace covcast {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what)
{
    if (!j.is_object()) {
        throw std::invalid_argument(fmt::format("{} must be a JSON object", what));
    }
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw std::invalid_argument(fmt::format("unknown key '{}' in {}", item.key(), what));
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base)
{
    if (p.empty() || p.is_absolute() || base.empty()) {
        return p;
    }
    return base / p;
}

ModelSpec with_family(ModelFamily family)
{
    ModelSpec m;
    m.family = family;
    return m;
}

} // namespace

void RunConfig::validate() const
{
    if (windows.empty() || rebalances.empty() || models.empty()) {
        throw std::invalid_argument("grid is empty: windows, rebalances and models must be non-empty");
    }
    if (jobs == 0) {
        throw std::invalid_argument("jobs must be positive");
    }
    for (const auto w : windows) {
        for (const auto r : rebalances) {
            for (const auto& m : models) {
                StrategySpec s;
                s.window = w;
                s.rebalance = r;
                s.model = m;
                s.initial_capital = initial_capital;
                s.commission = commission;
                s.n_stock = n_stock;
                s.n_crypto = n_crypto;
                s.train_multiple = train_multiple;
                s.validate();
            }
        }
    }
}

void RunConfig::validate_paths() const
{
    for (const auto* p : {&prices, &caps, &classes}) {
        if (p->empty()) {
            throw std::invalid_argument("prices, caps and classes paths are required");
        }
        if (!std::filesystem::exists(*p)) {
            throw DataError(fmt::format("file not found: {}", p->string()));
        }
    }
}

std::vector<ModelSpec> classical_models()
{
    std::vector<ModelSpec> out;
    for (auto kind : {EstimatorKind::Sample, EstimatorKind::SemiCov, EstimatorKind::Ewma,
                      EstimatorKind::ShrinkConstVar, EstimatorKind::ShrinkSingleFactor,
                      EstimatorKind::ShrinkConstCorr, EstimatorKind::OracleApprox}) {
        ModelSpec m;
        m.estimator.kind = kind;
        out.push_back(m);
    }
    return out;
}

std::vector<ModelSpec> lstm_models()
{
    const std::vector<std::vector<Eigen::Index>> units{
        {5}, {10}, {15}, {20}, {5, 5}, {5, 10}, {10, 5}, {10, 10}, {15, 15}, {20, 20}};
    std::vector<ModelSpec> out;
    for (const auto& h : units) {
        for (std::size_t batch : {8, 16}) {
            for (std::size_t len : {15, 20}) {
                ModelSpec m = with_family(ModelFamily::Lstm);
                m.train.hidden = h;
                m.train.batch_size = batch;
                m.train.seq_len = len;
                out.push_back(m);
            }
        }
    }
    return out;
}

std::vector<ModelSpec> probabilistic_models(ModelFamily family)
{
    if (family != ModelFamily::DeepVar && family != ModelFamily::GpVar) {
        throw std::invalid_argument("probabilistic_models: family must be DeepVAR or GPVAR");
    }
    std::vector<ModelSpec> out;
    for (std::size_t units : {5, 10, 15, 20}) {
        for (bool scaling : {false, true}) {
            for (bool low_rank : {false, true}) {
                for (bool copula : {false, true}) {
                    ModelSpec m = with_family(family);
                    m.prob.hidden = units;
                    m.prob.scaling = scaling;
                    m.prob.low_rank = low_rank;
                    m.prob.copula = copula;
                    out.push_back(m);
                }
            }
        }
    }
    return out;
}

std::vector<ModelSpec> preset_models(const std::string& name)
{
    if (name == "classical") {
        return classical_models();
    }
    if (name == "lstm") {
        return lstm_models();
    }
    if (name == "deepvar") {
        return probabilistic_models(ModelFamily::DeepVar);
    }
    if (name == "gpvar") {
        return probabilistic_models(ModelFamily::GpVar);
    }
    if (name == "persistence") {
        return {with_family(ModelFamily::Persistence)};
    }
    throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
}

ModelSpec parse_model_name(const std::string& name)
{
    try {
        ModelSpec m;
        m.estimator.kind = parse_estimator_kind(name);
        return m;
    } catch (const std::invalid_argument&) {
    }
    try {
        return with_family(parse_model_family(name));
    } catch (const std::invalid_argument&) {
    }
    throw std::invalid_argument(fmt::format("unknown estimator or model '{}'", name));
}

ModelSpec parse_model_spec(const json& j)
{
    if (j.is_string()) {
        return parse_model_name(j.get<std::string>());
    }
    check_keys(j,
               {"family", "estimator", "decay", "threshold", "hidden", "layers", "batch_size",
                "seq_len", "epochs", "learning_rate", "scaling", "copula", "low_rank", "rank",
                "mc_samples", "series_subset", "embedding_dim"},
               "model spec");
    std::string family = "Classical";
    read(j, "family", family);
    ModelSpec m = with_family(parse_model_family(family));

    if (m.family == ModelFamily::Classical) {
        std::string est = "Sample";
        read(j, "estimator", est);
        m.estimator.kind = parse_estimator_kind(est);
        read(j, "decay", m.estimator.decay);
        read(j, "threshold", m.estimator.threshold);
        m.estimator.validate();
        return m;
    }
    if (!m.neural()) {
        return m;
    }
    read(j, "batch_size", m.train.batch_size);
    read(j, "seq_len", m.train.seq_len);
    read(j, "epochs", m.train.epochs);
    read(j, "learning_rate", m.train.learning_rate);
    if (m.family == ModelFamily::Lstm) {
        if (j.contains("hidden")) {
            const json& h = j.at("hidden");
            m.train.hidden = h.is_array() ? h.get<std::vector<Eigen::Index>>()
                                          : std::vector<Eigen::Index>{h.get<Eigen::Index>()};
        }
    } else {
        read(j, "hidden", m.prob.hidden);
        read(j, "layers", m.prob.layers);
        read(j, "scaling", m.prob.scaling);
        read(j, "copula", m.prob.copula);
        read(j, "low_rank", m.prob.low_rank);
        read(j, "rank", m.prob.rank);
        read(j, "mc_samples", m.prob.mc_samples);
        read(j, "series_subset", m.prob.series_subset);
        read(j, "embedding_dim", m.prob.embedding_dim);
    }
    m.train.validate();
    return m;
}

json model_spec_json(const ModelSpec& m)
{
    json j;
    j["family"] = to_string(m.family);
    if (m.family == ModelFamily::Classical) {
        j["estimator"] = to_string(m.estimator.kind);
        j["decay"] = m.estimator.decay;
        j["threshold"] = m.estimator.threshold;
        return j;
    }
    if (!m.neural()) {
        return j;
    }
    j["batch_size"] = m.train.batch_size;
    j["seq_len"] = m.train.seq_len;
    j["epochs"] = m.train.epochs;
    j["learning_rate"] = m.train.learning_rate;
    if (m.family == ModelFamily::Lstm) {
        j["hidden"] = m.train.hidden;
    } else {
        j["hidden"] = m.prob.hidden;
        j["layers"] = m.prob.layers;
        j["scaling"] = m.prob.scaling;
        j["copula"] = m.prob.copula;
        j["low_rank"] = m.prob.low_rank;
        j["rank"] = m.prob.rank;
        j["mc_samples"] = m.prob.mc_samples;
        j["series_subset"] = m.prob.series_subset;
        j["embedding_dim"] = m.prob.embedding_dim;
    }
    return j;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir)
{
    check_keys(j,
               {"prices", "caps", "classes", "out", "windows", "rebalances", "models", "presets",
                "seed", "jobs", "initial_capital", "commission", "n_stock", "n_crypto",
                "train_multiple", "align_start", "epochs"},
               "run config");
    RunConfig cfg;
    std::string prices, caps, classes, out = cfg.out.string();
    read(j, "prices", prices);
    read(j, "caps", caps);
    read(j, "classes", classes);
    read(j, "out", out);
    cfg.prices = resolve(prices, base_dir);
    cfg.caps = resolve(caps, base_dir);
    cfg.classes = resolve(classes, base_dir);
    cfg.out = resolve(out, base_dir);
    read(j, "windows", cfg.windows);
    read(j, "rebalances", cfg.rebalances);
    read(j, "seed", cfg.seed);
    read(j, "jobs", cfg.jobs);
    read(j, "initial_capital", cfg.initial_capital);
    read(j, "commission", cfg.commission);
    read(j, "n_stock", cfg.n_stock);
    read(j, "n_crypto", cfg.n_crypto);
    read(j, "train_multiple", cfg.train_multiple);
    read(j, "align_start", cfg.align_start);

    std::vector<std::string> presets;
    read(j, "presets", presets);
    for (const auto& p : presets) {
        const auto models = preset_models(p);
        cfg.models.insert(cfg.models.end(), models.begin(), models.end());
    }
    if (j.contains("models")) {
        if (!j.at("models").is_array()) {
            throw std::invalid_argument("'models' must be a list");
        }
        for (const auto& m : j.at("models")) {
            cfg.models.push_back(parse_model_spec(m));
        }
    }
    if (presets.empty() && !j.contains("models")) {
        cfg.models = classical_models();
    }
    if (j.contains("epochs")) {
        std::size_t epochs = 0;
        read(j, "epochs", epochs);
        for (auto& m : cfg.models) {
            m.train.epochs = epochs;
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open config {}", path.string()));
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(fmt::format("config {}: {}", path.string(), e.what()));
    }
    return parse_run_config(j, path.parent_path());
}

} // namespace covcast
