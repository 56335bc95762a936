#include "ifcast/forecast.hpp"

#include <json.hpp>

#include <cmath>
#include <future>

#include "ifcast/errors.hpp"
#include "ifcast/rng.hpp"

namespace ifcast {

std::string to_string(Pipeline p) {
    return p == Pipeline::Conventional ? "conventional" : "proposed";
}

int config_window(const PredictorConfig& cfg) {
    return std::visit(
        [](const auto& c) -> int {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ArimaConfig>) {
                return c.p;
            } else {
                return c.window;
            }
        },
        cfg);
}

std::string config_kind(const PredictorConfig& cfg) {
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TransformerConfig>) {
                return "transformer";
            } else if constexpr (std::is_same_v<T, LstmConfig>) {
                return "lstm";
            } else {
                return "arima";
            }
        },
        cfg);
}

std::unique_ptr<Predictor> train_predictor(const WindowDataset& ds,
                                           const PredictorConfig& cfg) {
    return std::visit(
        [&ds](const auto& c) -> std::unique_ptr<Predictor> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TransformerConfig>) {
                return train_transformer(ds, c);
            } else if constexpr (std::is_same_v<T, LstmConfig>) {
                return train_lstm(ds, c);
            } else {
                // AR fit sees exactly the values inside the training windows
                // and targets: series[0 .. split_index + window - 1].
                std::span<const double> prefix(
                    ds.series.data(),
                    ds.split_index + static_cast<std::size_t>(ds.window));
                return fit_arima(prefix, c);
            }
        },
        cfg);
}

std::unique_ptr<Predictor> load_predictor(const std::string& json_text) {
    std::string kind;
    try {
        kind = nlohmann::json::parse(json_text).at("kind").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("unparseable checkpoint: ") + e.what());
    }
    if (kind == "transformer") return transformer_from_checkpoint(json_text);
    if (kind == "lstm") return lstm_from_checkpoint(json_text);
    if (kind == "arima") return arima_from_checkpoint(json_text);
    throw InputError("unknown predictor kind in checkpoint: " + kind);
}

ForecastResult rolling_forecast(const Predictor& model, const WindowDataset& ds) {
    const auto w = static_cast<std::size_t>(ds.window);
    if (ds.split_index + w < model.min_history()) {
        throw InputError(
            "validation history is shorter than the model's minimum history");
    }
    ForecastResult out;
    out.first_slot = ds.split_index + w;
    const std::size_t pairs = ds.pair_count();
    out.predicted.reserve(pairs - ds.split_index);
    out.actual.reserve(pairs - ds.split_index);
    for (std::size_t k = ds.split_index; k < pairs; ++k) {
        std::span<const double> history(ds.series.data(), k + w);
        out.predicted.push_back(model.predict(history));
        out.actual.push_back(ds.targets[k]);
    }
    out.rmse = rmse(out.predicted, out.actual);
    return out;
}

ForecastResult forecast_conventional(
    std::span<const double> series, const PredictorConfig& cfg,
    std::vector<std::unique_ptr<Predictor>>* trained) {
    WindowDataset ds = build_dataset(series, config_window(cfg));
    std::unique_ptr<Predictor> model = train_predictor(ds, cfg);
    ForecastResult result = rolling_forecast(*model, ds);
    result.pipeline = Pipeline::Conventional;
    if (trained) trained->push_back(std::move(model));
    return result;
}

namespace {

PredictorConfig with_component_seed(const PredictorConfig& cfg,
                                    std::size_t component) {
    PredictorConfig out = cfg;
    std::string label = "component-" + std::to_string(component);
    std::visit(
        [&label](auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (!std::is_same_v<T, ArimaConfig>) {
                c.seed = derive_seed(c.seed, label);
            }
        },
        out);
    return out;
}

[[noreturn]] void rethrow_tagged(std::size_t component) {
    std::string tag = "component " + std::to_string(component) + ": ";
    try {
        throw;
    } catch (const DivergenceError& e) {
        throw DivergenceError(tag + e.what(), e.epoch, e.learning_rate);
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const InputError& e) {
        throw InputError(tag + e.what());
    } catch (const FitError& e) {
        throw FitError(tag + e.what());
    }
}

} // namespace

ForecastResult forecast_proposed(
    std::span<const double> series, const PredictorConfig& cfg,
    const SiftConfig& sift, std::vector<std::unique_ptr<Predictor>>* trained,
    int workers) {
    Decomposition dec = decompose(series, sift);
    std::vector<std::span<const double>> components;
    components.reserve(dec.imfs.size() + 1);
    for (const auto& imf : dec.imfs) components.emplace_back(imf);
    components.emplace_back(dec.residual);

    struct ComponentOutcome {
        std::unique_ptr<Predictor> model;
        ForecastResult part;
    };
    auto run_component = [&](std::size_t j) -> ComponentOutcome {
        try {
            ComponentOutcome oc;
            WindowDataset ds = build_dataset(components[j], config_window(cfg));
            oc.model = train_predictor(ds, with_component_seed(cfg, j));
            oc.part = rolling_forecast(*oc.model, ds);
            return oc;
        } catch (...) {
            rethrow_tagged(j);
        }
    };

    std::vector<ComponentOutcome> outcomes(components.size());
    if (workers <= 1 || components.size() <= 1) {
        for (std::size_t j = 0; j < components.size(); ++j) {
            outcomes[j] = run_component(j);
        }
    } else {
        // Components are independent; cap in-flight trainings at `workers`.
        const std::size_t cap = static_cast<std::size_t>(workers);
        std::vector<std::future<ComponentOutcome>> futures(components.size());
        std::size_t next = 0;
        std::size_t collect = 0;
        while (collect < components.size()) {
            while (next < components.size() && next - collect < cap) {
                futures[next] =
                    std::async(std::launch::async, run_component, next);
                ++next;
            }
            outcomes[collect] = futures[collect].get();
            ++collect;
        }
    }

    ForecastResult out;
    out.pipeline = Pipeline::Proposed;
    out.per_component_rmse.reserve(components.size());
    for (std::size_t j = 0; j < components.size(); ++j) {
        ForecastResult& part = outcomes[j].part;
        if (out.predicted.empty()) {
            out.predicted = part.predicted;
            out.actual = part.actual;
            out.first_slot = part.first_slot;
        } else {
            for (std::size_t i = 0; i < out.predicted.size(); ++i) {
                out.predicted[i] += part.predicted[i];
                out.actual[i] += part.actual[i];
            }
        }
        out.per_component_rmse.push_back(part.rmse);
        if (trained) trained->push_back(std::move(outcomes[j].model));
    }
    out.rmse = rmse(out.predicted, out.actual);
    return out;
}

} // namespace ifcast
