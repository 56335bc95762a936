#ifndef IFCAST_EMD_HPP
#define IFCAST_EMD_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace ifcast {

enum class BoundaryPolicy { Mirror, Clamp };

struct SiftConfig {
    int max_imfs = 10;
    int max_sift_iterations = 100;
    double sd_threshold = 0.2; // Cauchy-type stop on successive sift deltas
    BoundaryPolicy boundary_policy = BoundaryPolicy::Mirror;
};

// Ordered IMFs (highest local frequency first) plus the trend residual.
// Sum of all components reconstructs the source to float accumulation error.
struct Decomposition {
    std::vector<std::vector<double>> imfs;
    std::vector<double> residual;
    std::size_t source_length = 0;
};

// Interior strict extrema; a plateau of equal values reports its midpoint.
struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
};

Extrema find_extrema(std::span<const double> series);

// Natural cubic spline through (anchor, series[anchor]) points, extended at
// the boundaries per policy and evaluated at every index. One anchor gives a
// constant, two give a straight line. Throws InputError on empty anchors.
std::vector<double> envelope(std::span<const double> series,
                             std::span<const std::size_t> anchors,
                             BoundaryPolicy policy);

// Iterated sifting. Requires length >= 8.
Decomposition decompose(std::span<const double> series, const SiftConfig& cfg = {});

// Max abs deviation between the source and the sum of components.
double reconstruction_error(std::span<const double> series, const Decomposition& d);

std::size_t count_zero_crossings(std::span<const double> series);

} // namespace ifcast

#endif
