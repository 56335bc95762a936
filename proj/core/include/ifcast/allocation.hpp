#ifndef IFCAST_ALLOCATION_HPP
#define IFCAST_ALLOCATION_HPP

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ifcast {

// SINR from signal power, interference estimate, and noise, all linear.
// Negative interference estimates (possible after de-normalizing a dB
// forecast) clamp to zero; callers count clamps via the out-parameter.
double predicted_sinr(double signal_power, double predicted_interference,
                      double noise_power, std::size_t* clamp_count = nullptr);

// Which measurement the IIR update consumes: the printed recursion uses the
// two-step-old measurement J_{t-1} for the estimate at t+1; Recent uses the
// just-revealed J_t.
enum class MaIndexing { Printed, Recent };

struct MaEstimatorState {
    double alpha = 0.01;
    double previous_estimate = 0.0;
    double previous_measurement = 0.0;
    MaIndexing indexing = MaIndexing::Printed;
};

// One IIR update: returns the estimate for the next slot and the advanced
// state. Throws ConfigError unless alpha lies in (0,1).
std::pair<double, MaEstimatorState> ma_step(const MaEstimatorState& state,
                                            double new_measurement);

enum class EstimatorKind { Genie, MovingAverage, Predictor };

struct AllocationConfig {
    std::vector<double> targets; // block-error targets, each in (0, 0.5)
    int payload_bits = 50;
    double ma_alpha = 0.01;
    MaIndexing ma_indexing = MaIndexing::Printed;

    void validate() const; // throws ConfigError
};

struct AllocationRecord {
    std::size_t slot = 0;
    double target_error = 0.0;
    double predicted_interference = 0.0; // linear
    double predicted_sinr = 0.0;
    int chosen_blocklength = 1;
    double actual_interference = 0.0; // linear
    double actual_sinr = 0.0;
    double achieved_error = 0.0;
};

struct OutageCurve {
    std::vector<double> target_errors;
    std::vector<double> achieved_outages;      // mean per-slot achieved error
    std::vector<double> exceedance_fractions;  // share of slots above target
    std::string estimator_label;
};

struct AllocationRun {
    std::vector<AllocationRecord> records; // slot-major, target-minor
    OutageCurve curve;
    std::size_t clamped_predictions = 0;
    std::size_t first_slot = 0;
};

// Per-slot predict -> allocate -> reveal -> evaluate over slots
// [first_slot, length). `desired_power` and `interference` cover the whole
// trace; `predicted` (linear interference estimates, one per evaluated slot)
// is required for EstimatorKind::Predictor and ignored otherwise. The
// moving-average estimator warms its recursion over the pre-span history.
AllocationRun run_allocation(std::span<const double> desired_power,
                             std::span<const double> interference,
                             double noise_power,
                             std::span<const double> predicted,
                             std::size_t first_slot, EstimatorKind kind,
                             const AllocationConfig& cfg,
                             const std::string& estimator_label);

} // namespace ifcast

#endif
