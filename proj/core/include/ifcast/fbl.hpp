#ifndef IFCAST_FBL_HPP
#define IFCAST_FBL_HPP

namespace ifcast::fbl {

struct CodingSpec {
    int payload_bits = 50;        // D
    double target_error = 1e-5;   // epsilon in (0, 0.5]
    int blocklength = 1;          // R, channel uses
};

// Gaussian tail P[N(0,1) > x].
double q_function(double x);

// AWGN Shannon capacity, bits per channel use.
double capacity(double sinr);

// AWGN channel dispersion in bits^2 per channel use:
// V = (1 - 1/(1+sinr)^2) * (log2 e)^2.
double dispersion(double sinr);

// Normal-approximation block error Q((C*R - D) / sqrt(V*R)). Degenerate
// sinr = 0 carries no information and returns 1.
double block_error(double sinr, int payload_bits, int blocklength);
double block_error(double sinr, const CodingSpec& spec);

// Smallest R >= 1 with block_error(sinr, D, R) <= target_error, via doubling
// plus binary search (block_error is strictly decreasing in R).
// Throws FitError for sinr <= 0.
int min_blocklength(double sinr, int payload_bits, double target_error);

} // namespace ifcast::fbl

#endif
