#ifndef IFCAST_CANCELLATION_HPP
#define IFCAST_CANCELLATION_HPP

#include <span>

#include "ifcast/channel.hpp"
#include "ifcast/emd.hpp"
#include "ifcast/forecast.hpp"

namespace ifcast {

struct CancellationResult {
    ComplexTrace original; // the evaluated span of the interference
    ComplexTrace residual; // original minus the complex prediction
    double suppression_db = 0.0; // 10 log10(original power / residual power)
    double real_rmse = 0.0;
    double imag_rmse = 0.0;
    std::size_t first_slot = 0; // span start within the source trace
};

// Suppression of a perfectly canceled span is reported as this sentinel.
inline constexpr double kSuppressionCapDb = 300.0;

// Subtracts the predicted in-phase/quadrature series from the tail of the
// interference trace (the spans' common length defines the evaluation span).
// Throws InputError when the predicted lengths differ from each other or
// exceed the trace.
CancellationResult cancel(const ComplexTrace& interference,
                          std::span<const double> predicted_real,
                          std::span<const double> predicted_imag);

// Composes the scenario, forecasts Re(I) and Im(I) separately with the
// proposed EMD pipeline (part-specific seeds derived from cfg.seed), and
// cancels over the validation span.
CancellationResult run_cancellation(const ScenarioConfig& scenario,
                                    const TransformerConfig& cfg,
                                    const SiftConfig& sift, int workers = 1);

} // namespace ifcast

#endif
