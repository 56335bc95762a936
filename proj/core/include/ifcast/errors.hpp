#ifndef IFCAST_ERRORS_HPP
#define IFCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ifcast {

// Invalid configuration value (out-of-range Doppler, empty interferer list, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unusable input data (series too short, length mismatch, ...).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int epoch, double learning_rate)
        : std::runtime_error(what), epoch(epoch), learning_rate(learning_rate) {}
    int epoch;
    double learning_rate;
};

// Model fitting failed (unusable least-squares system, infeasible search, ...).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ifcast

#endif
