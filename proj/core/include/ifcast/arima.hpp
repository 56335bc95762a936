#ifndef IFCAST_ARIMA_HPP
#define IFCAST_ARIMA_HPP

#include <memory>
#include <span>
#include <vector>

#include "ifcast/predictor.hpp"

namespace ifcast {

// AR-integrated model: difference d times, fit AR(p) by least squares on the
// differenced series, forecast one step and un-difference. Only q = 0 is
// supported.
struct ArimaConfig {
    int p = 30;
    int d = 1;
    int q = 0;

    void validate() const; // throws ConfigError
};

// Fits on the given training series (length must exceed p + d + 5). The
// differenced regression includes an intercept only when d = 0; differencing
// already removes a constant drift. Throws FitError when the least-squares
// solution is not finite.
std::unique_ptr<Predictor> fit_arima(std::span<const double> series,
                                     const ArimaConfig& cfg);

std::unique_ptr<Predictor> arima_from_checkpoint(const std::string& json_text);

} // namespace ifcast

#endif
