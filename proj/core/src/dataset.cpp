#include "ifcast/dataset.hpp"

#include <cmath>
#include <string>

#include "ifcast/errors.hpp"

namespace ifcast {

WindowDataset build_dataset(std::span<const double> series, int window) {
    if (window < 1) throw ConfigError("build_dataset: window must be >= 1");
    if (series.size() < static_cast<std::size_t>(window) + 5) {
        throw InputError("build_dataset: series length " + std::to_string(series.size()) +
                         " too short for window " + std::to_string(window));
    }

    WindowDataset ds;
    ds.window = window;
    ds.series.assign(series.begin(), series.end());

    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t pairs = series.size() - w;
    ds.inputs.reserve(pairs);
    ds.targets.reserve(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
        ds.inputs.emplace_back(series.begin() + k, series.begin() + k + w);
        ds.targets.push_back(series[k + w]);
    }
    ds.split_index = static_cast<std::size_t>(0.8 * static_cast<double>(pairs));

    // Normalizer from training rows only: those cover series[0 .. split+W-1].
    const std::size_t train_span = ds.split_index + w;
    double mean = 0.0;
    for (std::size_t t = 0; t < train_span; ++t) mean += series[t];
    mean /= static_cast<double>(train_span);
    double var = 0.0;
    for (std::size_t t = 0; t < train_span; ++t) {
        double d = series[t] - mean;
        var += d * d;
    }
    var /= static_cast<double>(train_span);
    double sd = std::sqrt(var);
    ds.normalizer.mean = mean;
    ds.normalizer.stddev = sd < 1e-12 ? 1.0 : sd;
    return ds;
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || predicted.empty()) {
        throw InputError("rmse: series must have equal nonzero lengths");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        double d = predicted[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predicted.size()));
}

} // namespace ifcast
