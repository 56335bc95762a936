#include "ifcast/allocation.hpp"

#include <algorithm>
#include <cmath>

#include "ifcast/errors.hpp"
#include "ifcast/fbl.hpp"

namespace ifcast {

double predicted_sinr(double signal_power, double predicted_interference,
                      double noise_power, std::size_t* clamp_count) {
    if (predicted_interference < 0.0) {
        predicted_interference = 0.0;
        if (clamp_count) ++*clamp_count;
    }
    return signal_power / (predicted_interference + noise_power);
}

std::pair<double, MaEstimatorState> ma_step(const MaEstimatorState& state,
                                            double new_measurement) {
    if (!(state.alpha > 0.0 && state.alpha < 1.0))
        throw ConfigError("moving-average alpha must lie in (0, 1)");
    double sample = state.indexing == MaIndexing::Printed
                        ? state.previous_measurement
                        : new_measurement;
    double estimate =
        state.alpha * sample + (1.0 - state.alpha) * state.previous_estimate;
    MaEstimatorState next = state;
    next.previous_estimate = estimate;
    next.previous_measurement = new_measurement;
    return {estimate, next};
}

void AllocationConfig::validate() const {
    if (targets.empty())
        throw ConfigError("allocation needs at least one target error");
    for (double t : targets) {
        if (!(t > 0.0 && t < 0.5))
            throw ConfigError("allocation targets must lie in (0, 0.5)");
    }
    if (payload_bits < 1) throw ConfigError("payload_bits must be >= 1");
    if (!(ma_alpha > 0.0 && ma_alpha < 1.0))
        throw ConfigError("moving-average alpha must lie in (0, 1)");
}

AllocationRun run_allocation(std::span<const double> desired_power,
                             std::span<const double> interference,
                             double noise_power,
                             std::span<const double> predicted,
                             std::size_t first_slot, EstimatorKind kind,
                             const AllocationConfig& cfg,
                             const std::string& estimator_label) {
    cfg.validate();
    const std::size_t length = interference.size();
    if (desired_power.size() != length)
        throw InputError("desired power and interference lengths differ");
    if (first_slot < 2 || first_slot >= length)
        throw ConfigError("allocation span must start in [2, length)");
    const std::size_t span = length - first_slot;
    if (kind == EstimatorKind::Predictor && predicted.size() != span)
        throw ConfigError("predictor span does not align with allocation slots");

    // Per-slot interference estimates, one per evaluated slot.
    std::vector<double> estimates(span);
    AllocationRun run;
    switch (kind) {
    case EstimatorKind::Genie:
        for (std::size_t i = 0; i < span; ++i)
            estimates[i] = interference[first_slot + i];
        break;
    case EstimatorKind::Predictor:
        std::copy(predicted.begin(), predicted.end(), estimates.begin());
        break;
    case EstimatorKind::MovingAverage: {
        MaEstimatorState state;
        state.alpha = cfg.ma_alpha;
        state.indexing = cfg.ma_indexing;
        state.previous_estimate = interference[0];
        state.previous_measurement = interference[0];
        // Estimate for slot t consumes measurements up to t-1; warm up the
        // recursion through slot first_slot-1.
        double estimate = state.previous_estimate;
        for (std::size_t t = 1; t < first_slot; ++t) {
            std::tie(estimate, state) = ma_step(state, interference[t]);
        }
        // state now carries the estimate for slot first_slot.
        for (std::size_t i = 0; i < span; ++i) {
            estimates[i] = estimate;
            std::tie(estimate, state) = ma_step(state, interference[first_slot + i]);
        }
        break;
    }
    }

    run.first_slot = first_slot;
    run.curve.estimator_label = estimator_label;
    run.curve.target_errors = cfg.targets;
    run.curve.achieved_outages.assign(cfg.targets.size(), 0.0);
    run.curve.exceedance_fractions.assign(cfg.targets.size(), 0.0);
    run.records.reserve(span * cfg.targets.size());

    for (std::size_t i = 0; i < span; ++i) {
        const std::size_t slot = first_slot + i;
        const double p_s = desired_power[slot];
        const double actual = interference[slot];
        const double sinr_hat =
            predicted_sinr(p_s, estimates[i], noise_power, &run.clamped_predictions);
        const double sinr_actual = p_s / (actual + noise_power);
        for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
            const double target = cfg.targets[ti];
            fbl::CodingSpec spec;
            spec.payload_bits = cfg.payload_bits;
            spec.target_error = target;
            const int r = fbl::min_blocklength(sinr_hat, cfg.payload_bits, target);
            spec.blocklength = r;
            const double achieved = fbl::block_error(sinr_actual, spec);
            AllocationRecord rec;
            rec.slot = slot;
            rec.target_error = target;
            rec.predicted_interference = std::max(estimates[i], 0.0);
            rec.predicted_sinr = sinr_hat;
            rec.chosen_blocklength = r;
            rec.actual_interference = actual;
            rec.actual_sinr = sinr_actual;
            rec.achieved_error = achieved;
            run.records.push_back(rec);
            run.curve.achieved_outages[ti] += achieved;
            if (achieved > target) run.curve.exceedance_fractions[ti] += 1.0;
        }
    }
    for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
        run.curve.achieved_outages[ti] /= static_cast<double>(span);
        run.curve.exceedance_fractions[ti] /= static_cast<double>(span);
    }
    return run;
}

} // namespace ifcast
