#ifndef IFCAST_FORECAST_HPP
#define IFCAST_FORECAST_HPP

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ifcast/arima.hpp"
#include "ifcast/dataset.hpp"
#include "ifcast/emd.hpp"
#include "ifcast/lstm.hpp"
#include "ifcast/predictor.hpp"
#include "ifcast/transformer.hpp"

namespace ifcast {

enum class Pipeline { Conventional, Proposed };

std::string to_string(Pipeline p);

using PredictorConfig = std::variant<TransformerConfig, LstmConfig, ArimaConfig>;

// Window used for dataset geometry: the model's training window, or p for
// the AR model (whose training window equals its order).
int config_window(const PredictorConfig& cfg);

std::string config_kind(const PredictorConfig& cfg);

// Trains the configured model on the training portion of `ds`.
std::unique_ptr<Predictor> train_predictor(const WindowDataset& ds,
                                           const PredictorConfig& cfg);

// Inverse of Predictor::serialize for any supported kind.
std::unique_ptr<Predictor> load_predictor(const std::string& json_text);

struct ForecastResult {
    std::vector<double> predicted; // validation portion, original scale
    std::vector<double> actual;
    double rmse = 0.0;
    Pipeline pipeline = Pipeline::Conventional;
    std::vector<double> per_component_rmse; // proposed pipeline only
    std::size_t first_slot = 0; // series index of the first validation target
};

// One-step-ahead predictions over the validation portion, conditioning on
// the true observed history at every step (teacher forcing, no feedback).
ForecastResult rolling_forecast(const Predictor& model, const WindowDataset& ds);

// Train directly on the raw series and evaluate on its validation portion.
// When `trained` is given, the fitted predictor is appended to it.
ForecastResult forecast_conventional(
    std::span<const double> series, const PredictorConfig& cfg,
    std::vector<std::unique_ptr<Predictor>>* trained = nullptr);

// Decompose the series, train one model per IMF plus one for the residual
// (component seeds derived from the base seed), and sum the component
// predictions into the reconstructed forecast. When `trained` is given, the
// fitted component predictors are appended in component order. Components
// are independent; `workers` > 1 trains them concurrently with identical
// results (combination is by component index).
ForecastResult forecast_proposed(
    std::span<const double> series, const PredictorConfig& cfg,
    const SiftConfig& sift,
    std::vector<std::unique_ptr<Predictor>>* trained = nullptr, int workers = 1);

} // namespace ifcast

#endif
