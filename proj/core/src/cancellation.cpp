#include "ifcast/cancellation.hpp"

#include <cmath>

#include "ifcast/errors.hpp"
#include "ifcast/rng.hpp"

namespace ifcast {

CancellationResult cancel(const ComplexTrace& interference,
                          std::span<const double> predicted_real,
                          std::span<const double> predicted_imag) {
    if (predicted_real.size() != predicted_imag.size())
        throw InputError("predicted real/imag series lengths differ");
    const std::size_t span = predicted_real.size();
    if (span == 0 || span > interference.size())
        throw InputError("predicted span does not fit the interference trace");

    CancellationResult out;
    out.first_slot = interference.size() - span;
    out.original.label = interference.label;
    out.residual.label = interference.label + "-residual";
    out.original.samples.reserve(span);
    out.residual.samples.reserve(span);

    double orig_power = 0.0;
    double resid_power = 0.0;
    double real_sq = 0.0;
    double imag_sq = 0.0;
    for (std::size_t i = 0; i < span; ++i) {
        cplx orig = interference.samples[out.first_slot + i];
        cplx resid = orig - cplx(predicted_real[i], predicted_imag[i]);
        out.original.samples.push_back(orig);
        out.residual.samples.push_back(resid);
        orig_power += std::norm(orig);
        resid_power += std::norm(resid);
        real_sq += resid.real() * resid.real();
        imag_sq += resid.imag() * resid.imag();
    }
    out.real_rmse = std::sqrt(real_sq / static_cast<double>(span));
    out.imag_rmse = std::sqrt(imag_sq / static_cast<double>(span));
    if (resid_power <= 0.0) {
        out.suppression_db = orig_power > 0.0 ? kSuppressionCapDb : 0.0;
    } else {
        out.suppression_db = std::min(kSuppressionCapDb,
                                      10.0 * std::log10(orig_power / resid_power));
    }
    return out;
}

CancellationResult run_cancellation(const ScenarioConfig& scenario,
                                    const TransformerConfig& cfg,
                                    const SiftConfig& sift, int workers) {
    ComposedScenario composed = compose_received(scenario);
    const ComplexTrace& interference = composed.interference;

    std::vector<double> real_part(interference.size());
    std::vector<double> imag_part(interference.size());
    for (std::size_t i = 0; i < interference.size(); ++i) {
        real_part[i] = interference.samples[i].real();
        imag_part[i] = interference.samples[i].imag();
    }

    TransformerConfig real_cfg = cfg;
    real_cfg.seed = derive_seed(cfg.seed, "cancel-real");
    TransformerConfig imag_cfg = cfg;
    imag_cfg.seed = derive_seed(cfg.seed, "cancel-imag");

    ForecastResult real_fc =
        forecast_proposed(real_part, real_cfg, sift, nullptr, workers);
    ForecastResult imag_fc =
        forecast_proposed(imag_part, imag_cfg, sift, nullptr, workers);
    if (real_fc.first_slot != imag_fc.first_slot ||
        real_fc.predicted.size() != imag_fc.predicted.size()) {
        throw InputError("real/imag forecast spans diverged");
    }

    return cancel(interference, real_fc.predicted, imag_fc.predicted);
}

} // namespace ifcast
