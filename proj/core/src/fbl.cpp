#include "ifcast/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifcast/errors.hpp"

namespace ifcast::fbl {

namespace {
// (log2 e)^2, the dispersion limit as sinr -> infinity.
constexpr double kLog2eSq = 2.0813689810056077;
} // namespace

double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double capacity(double sinr) {
    return std::log2(1.0 + sinr);
}

double dispersion(double sinr) {
    double shrink = 1.0 + sinr;
    return (1.0 - 1.0 / (shrink * shrink)) * kLog2eSq;
}

double block_error(double sinr, int payload_bits, int blocklength) {
    if (payload_bits < 1 || blocklength < 1) {
        throw ConfigError("block_error: payload_bits and blocklength must be >= 1");
    }
    if (!(sinr > 0.0)) {
        // C = V = 0: the channel carries no information.
        return 1.0;
    }
    double c = capacity(sinr);
    double v = dispersion(sinr);
    double r = static_cast<double>(blocklength);
    double x = (c * r - static_cast<double>(payload_bits)) / std::sqrt(v * r);
    return std::clamp(q_function(x), 0.0, 1.0);
}

double block_error(double sinr, const CodingSpec& spec) {
    return block_error(sinr, spec.payload_bits, spec.blocklength);
}

int min_blocklength(double sinr, int payload_bits, double target_error) {
    if (!(sinr > 0.0)) {
        throw FitError("min_blocklength: infeasible, sinr must be positive");
    }
    if (!(target_error > 0.0 && target_error < 0.5)) {
        throw ConfigError("min_blocklength: target_error must lie in (0, 0.5)");
    }

    // Exponential search for a feasible upper bound.
    int hi = 1;
    while (block_error(sinr, payload_bits, hi) > target_error) {
        if (hi > (1 << 29)) {
            throw FitError("min_blocklength: no feasible blocklength below 2^30 for sinr=" +
                           std::to_string(sinr));
        }
        hi *= 2;
    }
    if (hi == 1) return 1;

    // Invariant: error(hi) <= target < error(lo).
    int lo = hi / 2;
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        if (block_error(sinr, payload_bits, mid) <= target_error) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace ifcast::fbl
