#ifndef IFCAST_PREDICTOR_HPP
#define IFCAST_PREDICTOR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ifcast {

// A fitted one-step-ahead model. Immutable after training and safe to share
// across threads for inference.
class Predictor {
public:
    virtual ~Predictor() = default;

    // Next-step prediction in the original series scale, conditioned on the
    // raw observed history (at least min_history() samples).
    virtual double predict(std::span<const double> history) const = 0;

    virtual std::size_t min_history() const = 0;

    virtual std::string kind() const = 0;

    // Versioned JSON checkpoint; see load_predictor in forecast.hpp.
    virtual std::string serialize() const = 0;

    // Mean training loss per epoch (empty for closed-form fits).
    std::vector<double> epoch_loss;
};

} // namespace ifcast

#endif
