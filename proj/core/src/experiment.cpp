#include "ifcast/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "ifcast/errors.hpp"
#include "ifcast/rng.hpp"

namespace ifcast {

namespace {

const std::set<std::string> kEstimatorNames = {"genie", "moving-average",
                                               "predictor"};

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

SymbolSource parse_symbols(const std::string& s, const std::string& where) {
    if (s == "unit-constant") return SymbolSource::UnitConstant;
    if (s == "qpsk") return SymbolSource::Qpsk;
    if (s == "correlated-gaussian") return SymbolSource::CorrelatedGaussian;
    throw ConfigError("unknown symbol source '" + s + "' in " + where +
                      " (expected unit-constant, qpsk, or correlated-gaussian)");
}

std::string symbols_name(SymbolSource s) {
    switch (s) {
    case SymbolSource::UnitConstant: return "unit-constant";
    case SymbolSource::Qpsk: return "qpsk";
    case SymbolSource::CorrelatedGaussian: return "correlated-gaussian";
    }
    return "qpsk";
}

LinkConfig parse_link(const nlohmann::json& j, const LinkConfig& base,
                      const std::string& where) {
    check_keys(j, {"mean_power_db", "doppler_ts", "symbols"}, where);
    LinkConfig link = base;
    if (j.contains("mean_power_db"))
        link.mean_power_db = j.at("mean_power_db").get<double>();
    if (j.contains("doppler_ts")) link.doppler_ts = j.at("doppler_ts").get<double>();
    if (j.contains("symbols"))
        link.symbol_source =
            parse_symbols(j.at("symbols").get<std::string>(), where);
    return link;
}

nlohmann::json link_json(const LinkConfig& link) {
    return {{"mean_power_db", link.mean_power_db},
            {"doppler_ts", link.doppler_ts},
            {"symbols", symbols_name(link.symbol_source)}};
}

PredictorConfig parse_predictor(const nlohmann::json& j,
                                const PredictorConfig& base) {
    std::string kind =
        j.contains("kind") ? j.at("kind").get<std::string>() : config_kind(base);
    if (kind == "transformer") {
        check_keys(j,
                   {"kind", "window", "blocks", "head_size", "heads", "ff_dim",
                    "dropout", "epochs", "learning_rate", "batch_size",
                    "table2_literal"},
                   "predictor");
        TransformerConfig c;
        if (std::holds_alternative<TransformerConfig>(base))
            c = std::get<TransformerConfig>(base);
        if (j.contains("window")) c.window = j.at("window").get<int>();
        if (j.contains("blocks")) c.blocks = j.at("blocks").get<int>();
        if (j.contains("head_size")) c.head_size = j.at("head_size").get<int>();
        if (j.contains("heads")) c.heads = j.at("heads").get<int>();
        if (j.contains("ff_dim")) c.ff_dim = j.at("ff_dim").get<int>();
        if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("learning_rate"))
            c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
        if (j.contains("table2_literal"))
            c.table2_literal = j.at("table2_literal").get<bool>();
        return c;
    }
    if (kind == "lstm") {
        check_keys(j,
                   {"kind", "window", "layer_sizes", "dense_sizes", "epochs",
                    "learning_rate", "batch_size"},
                   "predictor");
        LstmConfig c;
        if (std::holds_alternative<LstmConfig>(base)) c = std::get<LstmConfig>(base);
        if (j.contains("window")) c.window = j.at("window").get<int>();
        if (j.contains("layer_sizes"))
            c.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        if (j.contains("dense_sizes"))
            c.dense_sizes = j.at("dense_sizes").get<std::vector<int>>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("learning_rate"))
            c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
        return c;
    }
    if (kind == "arima") {
        check_keys(j, {"kind", "p", "d", "q"}, "predictor");
        ArimaConfig c;
        if (std::holds_alternative<ArimaConfig>(base)) c = std::get<ArimaConfig>(base);
        if (j.contains("p")) c.p = j.at("p").get<int>();
        if (j.contains("d")) c.d = j.at("d").get<int>();
        if (j.contains("q")) c.q = j.at("q").get<int>();
        return c;
    }
    throw ConfigError("unknown predictor kind '" + kind +
                      "' (expected transformer, lstm, or arima)");
}

nlohmann::json predictor_json(const PredictorConfig& cfg) {
    return std::visit(
        [](const auto& c) -> nlohmann::json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TransformerConfig>) {
                return {{"kind", "transformer"},
                        {"window", c.window},
                        {"blocks", c.blocks},
                        {"head_size", c.head_size},
                        {"heads", c.heads},
                        {"ff_dim", c.ff_dim},
                        {"dropout", c.dropout},
                        {"epochs", c.epochs},
                        {"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"table2_literal", c.table2_literal}};
            } else if constexpr (std::is_same_v<T, LstmConfig>) {
                return {{"kind", "lstm"},
                        {"window", c.window},
                        {"layer_sizes", c.layer_sizes},
                        {"dense_sizes", c.dense_sizes},
                        {"epochs", c.epochs},
                        {"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size}};
            } else {
                return {{"kind", "arima"}, {"p", c.p}, {"d", c.d}, {"q", c.q}};
            }
        },
        cfg);
}

} // namespace

void ExperimentConfig::validate() const {
    ifcast::validate(scenario);
    if (scenario.interferers.empty())
        throw ConfigError("experiment scenario needs at least one interferer");
    std::visit([](const auto& c) { c.validate(); }, predictor);
    if (sift.max_imfs < 1) throw ConfigError("sift max_imfs must be >= 1");
    if (sift.max_sift_iterations < 1)
        throw ConfigError("sift max_sift_iterations must be >= 1");
    if (!(sift.sd_threshold > 0.0))
        throw ConfigError("sift sd_threshold must be positive");
    allocation.validate();
    for (std::size_t i = 1; i < allocation.targets.size(); ++i) {
        if (!(allocation.targets[i] < allocation.targets[i - 1]))
            throw ConfigError("allocation targets must be sorted descending");
    }
    if (estimators.empty())
        throw ConfigError("experiment needs at least one estimator");
    for (const std::string& e : estimators) {
        if (!kEstimatorNames.count(e)) {
            throw ConfigError("unknown estimator '" + e +
                              "' (expected genie, moving-average, or predictor)");
        }
    }
}

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.scenario.desired.mean_power_db = 20.0; // mean SNR
    cfg.scenario.desired.doppler_ts = 0.01;
    cfg.scenario.desired.symbol_source = SymbolSource::Qpsk;
    const double inrs[] = {5.0, 2.0, 0.0, -3.0, -10.0, 1.0};
    for (double inr : inrs) {
        LinkConfig link;
        link.mean_power_db = inr;
        link.doppler_ts = 0.01;
        link.symbol_source = SymbolSource::Qpsk;
        cfg.scenario.interferers.push_back(link);
    }
    cfg.scenario.noise_power = 1.0;
    cfg.scenario.trace_length = 200;
    cfg.predictor = TransformerConfig{};
    cfg.pipeline = Pipeline::Proposed;
    cfg.allocation.targets = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    cfg.allocation.payload_bits = 50;
    cfg.allocation.ma_alpha = 0.01;
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg = default_experiment_config();
    try {
        check_keys(j,
                   {"version", "global_seed", "scale", "output_dir", "scenario",
                    "predictor", "pipeline", "sift", "allocation", "estimators"},
                   "config root");
        if (j.contains("version") && j.at("version").get<int>() != 1)
            throw ConfigError("unsupported config version");
        if (j.contains("global_seed"))
            cfg.global_seed = j.at("global_seed").get<std::uint64_t>();
        if (j.contains("scale")) {
            std::string s = j.at("scale").get<std::string>();
            if (s == "db") cfg.scale = PowerScale::Db;
            else if (s == "linear") cfg.scale = PowerScale::Linear;
            else throw ConfigError("scale must be 'db' or 'linear'");
        }
        if (j.contains("output_dir"))
            cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("scenario")) {
            const auto& js = j.at("scenario");
            check_keys(js,
                       {"trace_length", "noise_power", "desired", "interferers"},
                       "scenario");
            if (js.contains("trace_length"))
                cfg.scenario.trace_length = js.at("trace_length").get<std::size_t>();
            if (js.contains("noise_power"))
                cfg.scenario.noise_power = js.at("noise_power").get<double>();
            if (js.contains("desired"))
                cfg.scenario.desired =
                    parse_link(js.at("desired"), cfg.scenario.desired, "desired link");
            if (js.contains("interferers")) {
                cfg.scenario.interferers.clear();
                LinkConfig base;
                base.symbol_source = SymbolSource::Qpsk;
                for (const auto& ji : js.at("interferers")) {
                    cfg.scenario.interferers.push_back(
                        parse_link(ji, base, "interferer"));
                }
            }
        }
        if (j.contains("predictor"))
            cfg.predictor = parse_predictor(j.at("predictor"), cfg.predictor);
        if (j.contains("pipeline")) {
            std::string p = j.at("pipeline").get<std::string>();
            if (p == "conventional") cfg.pipeline = Pipeline::Conventional;
            else if (p == "proposed") cfg.pipeline = Pipeline::Proposed;
            else throw ConfigError("pipeline must be 'conventional' or 'proposed'");
        }
        if (j.contains("sift")) {
            const auto& js = j.at("sift");
            check_keys(js,
                       {"max_imfs", "max_sift_iterations", "sd_threshold",
                        "boundary"},
                       "sift");
            if (js.contains("max_imfs"))
                cfg.sift.max_imfs = js.at("max_imfs").get<int>();
            if (js.contains("max_sift_iterations"))
                cfg.sift.max_sift_iterations =
                    js.at("max_sift_iterations").get<int>();
            if (js.contains("sd_threshold"))
                cfg.sift.sd_threshold = js.at("sd_threshold").get<double>();
            if (js.contains("boundary")) {
                std::string b = js.at("boundary").get<std::string>();
                if (b == "mirror") cfg.sift.boundary_policy = BoundaryPolicy::Mirror;
                else if (b == "clamp") cfg.sift.boundary_policy = BoundaryPolicy::Clamp;
                else throw ConfigError("sift boundary must be 'mirror' or 'clamp'");
            }
        }
        if (j.contains("allocation")) {
            const auto& ja = j.at("allocation");
            check_keys(ja, {"targets", "payload_bits", "ma_alpha", "ma_indexing"},
                       "allocation");
            if (ja.contains("targets"))
                cfg.allocation.targets = ja.at("targets").get<std::vector<double>>();
            if (ja.contains("payload_bits"))
                cfg.allocation.payload_bits = ja.at("payload_bits").get<int>();
            if (ja.contains("ma_alpha"))
                cfg.allocation.ma_alpha = ja.at("ma_alpha").get<double>();
            if (ja.contains("ma_indexing")) {
                std::string m = ja.at("ma_indexing").get<std::string>();
                if (m == "printed") cfg.allocation.ma_indexing = MaIndexing::Printed;
                else if (m == "recent") cfg.allocation.ma_indexing = MaIndexing::Recent;
                else throw ConfigError("ma_indexing must be 'printed' or 'recent'");
            }
        }
        if (j.contains("estimators"))
            cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = 1;
    j["global_seed"] = cfg.global_seed;
    j["scale"] = cfg.scale == PowerScale::Db ? "db" : "linear";
    j["output_dir"] = cfg.output_dir;
    nlohmann::json js;
    js["trace_length"] = cfg.scenario.trace_length;
    js["noise_power"] = cfg.scenario.noise_power;
    js["desired"] = link_json(cfg.scenario.desired);
    nlohmann::json interferers = nlohmann::json::array();
    for (const LinkConfig& link : cfg.scenario.interferers)
        interferers.push_back(link_json(link));
    js["interferers"] = std::move(interferers);
    j["scenario"] = std::move(js);
    j["predictor"] = predictor_json(cfg.predictor);
    j["pipeline"] = to_string(cfg.pipeline);
    j["sift"] = {{"max_imfs", cfg.sift.max_imfs},
                 {"max_sift_iterations", cfg.sift.max_sift_iterations},
                 {"sd_threshold", cfg.sift.sd_threshold},
                 {"boundary", cfg.sift.boundary_policy == BoundaryPolicy::Mirror
                                  ? "mirror"
                                  : "clamp"}};
    j["allocation"] = {
        {"targets", cfg.allocation.targets},
        {"payload_bits", cfg.allocation.payload_bits},
        {"ma_alpha", cfg.allocation.ma_alpha},
        {"ma_indexing",
         cfg.allocation.ma_indexing == MaIndexing::Printed ? "printed" : "recent"}};
    j["estimators"] = cfg.estimators;
    return j.dump(2) + "\n";
}

ExperimentConfig with_derived_seeds(const ExperimentConfig& cfg) {
    ExperimentConfig out = cfg;
    out.scenario.rng_seed = derive_seed(cfg.global_seed, "scenario");
    std::visit(
        [&cfg](auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (!std::is_same_v<T, ArimaConfig>) {
                c.seed = derive_seed(cfg.global_seed, "predictor");
            }
        },
        out.predictor);
    return out;
}

ComposedScenario run_generate(const ExperimentConfig& cfg) {
    cfg.validate();
    return compose_received(with_derived_seeds(cfg).scenario);
}

ForecastArtifacts run_forecast(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentConfig seeded = with_derived_seeds(cfg);
    ForecastArtifacts art;
    art.composed = compose_received(seeded.scenario);
    art.series = interference_power_series(art.composed.interference, cfg.scale);
    if (cfg.pipeline == Pipeline::Conventional) {
        art.result =
            forecast_conventional(art.series, seeded.predictor, &art.predictors);
    } else {
        art.result = forecast_proposed(art.series, seeded.predictor, seeded.sift,
                                       &art.predictors, cfg.workers);
    }
    return art;
}

AllocationArtifacts run_allocate(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentConfig seeded = with_derived_seeds(cfg);
    AllocationArtifacts art;

    const bool wants_predictor =
        std::find(cfg.estimators.begin(), cfg.estimators.end(), "predictor") !=
        cfg.estimators.end();

    ComposedScenario composed;
    std::vector<double> predicted_linear;
    std::size_t first_slot = 0;
    if (wants_predictor) {
        art.forecast = run_forecast(cfg);
        composed = art.forecast->composed;
        first_slot = art.forecast->result.first_slot;
        predicted_linear = art.forecast->result.predicted;
        if (cfg.scale == PowerScale::Db) {
            for (double& v : predicted_linear) v = db_to_linear(v);
        }
    } else {
        composed = compose_received(seeded.scenario);
        // Align the span with what the configured predictor would evaluate.
        WindowDataset ds = build_dataset(
            interference_power_series(composed.interference, cfg.scale),
            config_window(cfg.predictor));
        first_slot = ds.split_index + static_cast<std::size_t>(ds.window);
    }

    std::vector<double> interference_linear =
        interference_power_series(composed.interference, PowerScale::Linear);

    for (const std::string& name : cfg.estimators) {
        EstimatorKind kind;
        std::string label = name;
        std::span<const double> predicted;
        if (name == "genie") {
            kind = EstimatorKind::Genie;
        } else if (name == "moving-average") {
            kind = EstimatorKind::MovingAverage;
        } else {
            kind = EstimatorKind::Predictor;
            predicted = predicted_linear;
            label = config_kind(cfg.predictor) + "-" + to_string(cfg.pipeline);
        }
        art.runs.push_back(run_allocation(
            composed.desired_power, interference_linear, cfg.scenario.noise_power,
            predicted, first_slot, kind, cfg.allocation, label));
    }
    return art;
}

CancellationResult run_cancel(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!std::holds_alternative<TransformerConfig>(cfg.predictor)) {
        throw ConfigError(
            "cancellation uses the proposed transformer pipeline; set the "
            "predictor kind to 'transformer'");
    }
    ExperimentConfig seeded = with_derived_seeds(cfg);
    return run_cancellation(seeded.scenario,
                            std::get<TransformerConfig>(seeded.predictor),
                            seeded.sift, cfg.workers);
}

} // namespace ifcast
