#ifndef IFCAST_CHANNEL_HPP
#define IFCAST_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ifcast {

using cplx = std::complex<double>;

enum class SymbolSource {
    UnitConstant,      // s(t) = 1
    Qpsk,              // i.i.d. unit-modulus QPSK
    CorrelatedGaussian // temporally correlated unit-power complex Gaussian
};

// One downlink: the desired link or a single interferer.
struct LinkConfig {
    double mean_power_db = 0.0;  // SNR (desired) or INR (interferer) over unit noise
    double doppler_ts = 0.01;    // normalized Doppler f_D*T_s, one fading value per slot
    SymbolSource symbol_source = SymbolSource::Qpsk;
};

struct ComplexTrace {
    std::vector<cplx> samples;
    std::string label;

    std::size_t size() const { return samples.size(); }
};

struct ScenarioConfig {
    LinkConfig desired;
    std::vector<LinkConfig> interferers;
    double noise_power = 1.0;  // linear N0
    std::size_t trace_length = 200;
    std::uint64_t rng_seed = 1;
};

// Throws ConfigError on violated invariants (doppler range, desired power not
// exceeding every interferer's, short trace). An empty interferer list is
// accepted here so degenerate no-interference scenes can be composed; the
// experiment layer requires at least one interferer.
void validate(const ScenarioConfig& scenario);

// Correlated Rayleigh fading h(t) with E[|h|^2] = 1, generated by a
// sum-of-sinusoids model with randomized arrival angles and phases.
// Deterministic given (config, seed).
ComplexTrace generate_fading(const LinkConfig& config, std::size_t length,
                             std::uint64_t seed);

// Symbol stream s(t) for one link; unit mean power for every source kind.
ComplexTrace generate_symbols(const LinkConfig& config, std::size_t length,
                              std::uint64_t seed);

// All per-slot series entering the received-signal sum. `received` is
// desired + interference + noise sample-wise; `interference` is the sum of
// the per-interferer terms sqrt(E_i) h_i(t) s_i(t).
struct ComposedScenario {
    ComplexTrace received;
    ComplexTrace desired;      // sqrt(E_s) h_s(t) s_0(t)
    ComplexTrace interference; // sum over interferers
    ComplexTrace noise;        // complex AWGN, variance N0
    std::vector<ComplexTrace> per_interferer;
    std::vector<double> desired_power; // |desired(t)|^2, the CSI-known P_s(t)
};

ComposedScenario compose_received(const ScenarioConfig& scenario);

enum class PowerScale { Linear, Db };

// Pointwise |x(t)|^2; dB scale floors at -300 dB so exact zeros stay finite.
std::vector<double> interference_power_series(const ComplexTrace& trace,
                                              PowerScale scale);

double power_to_db(double linear);
double db_to_linear(double db);

} // namespace ifcast

#endif
