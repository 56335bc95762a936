#include "ifcast/channel.hpp"

#include <cmath>
#include <numbers>

#include "ifcast/errors.hpp"
#include "ifcast/rng.hpp"

namespace ifcast {

namespace {

constexpr int kOscillators = 48;
constexpr double kDbFloor = -300.0;

void validate_link(const LinkConfig& link, const std::string& name) {
    if (!(link.doppler_ts > 0.0 && link.doppler_ts < 0.5)) {
        throw ConfigError(name + ": doppler_ts must lie in (0, 0.5), got " +
                          std::to_string(link.doppler_ts));
    }
}

// Sum-of-sinusoids process with Jakes Doppler spectrum (Zheng-Xiao angles).
// Real and imaginary parts each carry power 1/2, so E[|h|^2] = 1 and the
// envelope is Rayleigh with sigma = 1/sqrt(2).
ComplexTrace sum_of_sinusoids(double doppler_ts, std::size_t length,
                              std::uint64_t seed, const std::string& label) {
    Rng rng(seed);
    const double theta = rng.next_uniform(-std::numbers::pi, std::numbers::pi);

    std::vector<double> wr(kOscillators), wi(kOscillators);
    std::vector<double> phi(kOscillators), psi(kOscillators);
    for (int m = 0; m < kOscillators; ++m) {
        double alpha = (2.0 * std::numbers::pi * (m + 1) - std::numbers::pi + theta) /
                       (4.0 * kOscillators);
        wr[m] = 2.0 * std::numbers::pi * doppler_ts * std::cos(alpha);
        wi[m] = 2.0 * std::numbers::pi * doppler_ts * std::sin(alpha);
        phi[m] = rng.next_uniform(-std::numbers::pi, std::numbers::pi);
        psi[m] = rng.next_uniform(-std::numbers::pi, std::numbers::pi);
    }

    const double scale = std::sqrt(1.0 / kOscillators);
    ComplexTrace trace;
    trace.label = label;
    trace.samples.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
        double re = 0.0, im = 0.0;
        for (int m = 0; m < kOscillators; ++m) {
            re += std::cos(wr[m] * static_cast<double>(t) + phi[m]);
            im += std::cos(wi[m] * static_cast<double>(t) + psi[m]);
        }
        trace.samples[t] = cplx(scale * re, scale * im);
    }
    return trace;
}

} // namespace

void validate(const ScenarioConfig& scenario) {
    validate_link(scenario.desired, "desired");
    for (std::size_t i = 0; i < scenario.interferers.size(); ++i) {
        const LinkConfig& link = scenario.interferers[i];
        validate_link(link, "interferer " + std::to_string(i));
        if (!(scenario.desired.mean_power_db > link.mean_power_db)) {
            throw ConfigError("desired mean power must exceed every interferer's");
        }
    }
    if (scenario.trace_length < 20) {
        throw ConfigError("trace_length must be at least 20");
    }
    if (!(scenario.noise_power >= 0.0)) {
        throw ConfigError("noise_power must be nonnegative");
    }
}

ComplexTrace generate_fading(const LinkConfig& config, std::size_t length,
                             std::uint64_t seed) {
    validate_link(config, "link");
    if (length < 1) throw InputError("fading trace length must be positive");
    return sum_of_sinusoids(config.doppler_ts, length, seed, "fading");
}

ComplexTrace generate_symbols(const LinkConfig& config, std::size_t length,
                              std::uint64_t seed) {
    ComplexTrace trace;
    trace.label = "symbols";
    trace.samples.resize(length);
    switch (config.symbol_source) {
    case SymbolSource::UnitConstant:
        for (auto& s : trace.samples) s = cplx(1.0, 0.0);
        break;
    case SymbolSource::Qpsk: {
        Rng rng(seed);
        const double a = 1.0 / std::sqrt(2.0);
        for (auto& s : trace.samples) {
            std::uint64_t bits = rng.next_u64();
            s = cplx((bits & 1) ? a : -a, (bits & 2) ? a : -a);
        }
        break;
    }
    case SymbolSource::CorrelatedGaussian:
        // Unit-power correlated complex Gaussian with the same normalized
        // bandwidth as the link's fading; predictable when doppler_ts is small.
        trace = sum_of_sinusoids(config.doppler_ts, length, seed, "symbols");
        break;
    }
    return trace;
}

ComposedScenario compose_received(const ScenarioConfig& scenario) {
    validate(scenario);
    const std::size_t n = scenario.trace_length;
    const double n0 = scenario.noise_power;

    ComposedScenario out;
    out.received.label = "received";
    out.received.samples.assign(n, cplx(0.0, 0.0));
    out.interference.label = "interference";
    out.interference.samples.assign(n, cplx(0.0, 0.0));

    const double es = n0 > 0.0 ? n0 * db_to_linear(scenario.desired.mean_power_db)
                               : db_to_linear(scenario.desired.mean_power_db);
    ComplexTrace h_s = generate_fading(scenario.desired, n,
                                       derive_seed(scenario.rng_seed, "desired-fading"));
    ComplexTrace s_0 = generate_symbols(scenario.desired, n,
                                        derive_seed(scenario.rng_seed, "desired-symbols"));
    out.desired.label = "desired";
    out.desired.samples.resize(n);
    out.desired_power.resize(n);
    const double amp_s = std::sqrt(es);
    for (std::size_t t = 0; t < n; ++t) {
        out.desired.samples[t] = amp_s * h_s.samples[t] * s_0.samples[t];
        out.desired_power[t] = std::norm(out.desired.samples[t]);
    }

    out.per_interferer.reserve(scenario.interferers.size());
    for (std::size_t i = 0; i < scenario.interferers.size(); ++i) {
        const LinkConfig& link = scenario.interferers[i];
        const double base = n0 > 0.0 ? n0 : 1.0;
        const double ei = base * db_to_linear(link.mean_power_db);
        std::string tag = "interferer-" + std::to_string(i);
        ComplexTrace h = generate_fading(link, n, derive_seed(scenario.rng_seed, tag + "-fading"));
        ComplexTrace s = generate_symbols(link, n, derive_seed(scenario.rng_seed, tag + "-symbols"));
        ComplexTrace term;
        term.label = tag;
        term.samples.resize(n);
        const double amp = std::sqrt(ei);
        for (std::size_t t = 0; t < n; ++t) {
            term.samples[t] = amp * h.samples[t] * s.samples[t];
            out.interference.samples[t] += term.samples[t];
        }
        out.per_interferer.push_back(std::move(term));
    }

    out.noise.label = "noise";
    out.noise.samples.resize(n);
    Rng noise_rng(derive_seed(scenario.rng_seed, "noise"));
    const double sigma = std::sqrt(n0 / 2.0);
    for (std::size_t t = 0; t < n; ++t) {
        out.noise.samples[t] = cplx(sigma * noise_rng.next_gaussian(),
                                    sigma * noise_rng.next_gaussian());
    }

    for (std::size_t t = 0; t < n; ++t) {
        out.received.samples[t] =
            out.desired.samples[t] + out.interference.samples[t] + out.noise.samples[t];
    }
    return out;
}

std::vector<double> interference_power_series(const ComplexTrace& trace,
                                              PowerScale scale) {
    if (trace.samples.empty()) throw InputError("power series of empty trace");
    std::vector<double> power(trace.samples.size());
    for (std::size_t t = 0; t < power.size(); ++t) {
        double p = std::norm(trace.samples[t]);
        power[t] = scale == PowerScale::Linear ? p : power_to_db(p);
    }
    return power;
}

double power_to_db(double linear) {
    if (!(linear > 0.0)) return kDbFloor;
    return std::max(kDbFloor, 10.0 * std::log10(linear));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace ifcast
