#ifndef IFCAST_DATASET_HPP
#define IFCAST_DATASET_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ifcast {

// Z-score transform fitted on the training portion of a series.
struct Normalizer {
    double mean = 0.0;
    double stddev = 1.0;

    double normalize(double x) const { return (x - mean) / stddev; }
    double denormalize(double z) const { return z * stddev + mean; }
};

// Sliding-window one-step-ahead supervision: inputs[k] = series[k..k+W-1],
// targets[k] = series[k+W]. The first floor(0.8 * pairs) pairs are training,
// the rest validation. Values are kept in the original scale; models apply
// the normalizer themselves.
struct WindowDataset {
    int window = 0;
    std::vector<double> series;
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::size_t split_index = 0;
    Normalizer normalizer;

    std::size_t pair_count() const { return targets.size(); }
    std::size_t validation_count() const { return pair_count() - split_index; }
};

// Throws InputError unless series length >= window + 5.
WindowDataset build_dataset(std::span<const double> series, int window);

// sqrt(mean squared difference); lengths must match and be nonzero.
double rmse(std::span<const double> predicted, std::span<const double> actual);

} // namespace ifcast

#endif
