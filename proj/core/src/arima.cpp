#include "ifcast/arima.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>

#include "ifcast/errors.hpp"

namespace ifcast {

void ArimaConfig::validate() const {
    if (q != 0) throw ConfigError("arima supports q = 0 only (AR-integrated)");
    if (d != 0 && d != 1) throw ConfigError("arima d must be 0 or 1");
    if (p < 1) throw ConfigError("arima p must be >= 1");
}

namespace {

std::vector<double> difference(std::span<const double> series, int d) {
    std::vector<double> z(series.begin(), series.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = z.size() - 1; i > 0; --i) z[i] -= z[i - 1];
        z.erase(z.begin());
    }
    return z;
}

class ArimaPredictor final : public Predictor {
public:
    ArimaPredictor(ArimaConfig cfg, double intercept, std::vector<double> coeffs)
        : cfg_(cfg), intercept_(intercept), coeffs_(std::move(coeffs)) {}

    double predict(std::span<const double> history) const override {
        const auto need = min_history();
        if (history.size() < need)
            throw InputError("history shorter than the arima order p + d");
        std::span<const double> tail = history.subspan(history.size() - need);
        std::vector<double> z = difference(tail, cfg_.d);
        double forecast = intercept_;
        // coeffs_[i] multiplies the i-th most recent differenced value.
        for (int i = 0; i < cfg_.p; ++i) {
            forecast += coeffs_[static_cast<std::size_t>(i)] *
                        z[z.size() - 1 - static_cast<std::size_t>(i)];
        }
        return cfg_.d == 1 ? history.back() + forecast : forecast;
    }

    std::size_t min_history() const override {
        return static_cast<std::size_t>(cfg_.p + cfg_.d);
    }

    std::string kind() const override { return "arima"; }

    std::string serialize() const override {
        nlohmann::json j;
        j["format"] = "ifcast-predictor";
        j["version"] = 1;
        j["kind"] = "arima";
        j["config"] = {{"p", cfg_.p}, {"d", cfg_.d}, {"q", cfg_.q}};
        j["intercept"] = intercept_;
        j["coefficients"] = coeffs_;
        return j.dump();
    }

    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    ArimaConfig cfg_;
    double intercept_;
    std::vector<double> coeffs_;
};

} // namespace

std::unique_ptr<Predictor> fit_arima(std::span<const double> series,
                                     const ArimaConfig& cfg) {
    cfg.validate();
    if (series.size() <= static_cast<std::size_t>(cfg.p + cfg.d + 5))
        throw InputError("arima training series must be longer than p + d + 5");

    std::vector<double> z = difference(series, cfg.d);
    const auto p = static_cast<std::size_t>(cfg.p);
    const std::size_t rows = z.size() - p;
    const bool with_intercept = cfg.d == 0;
    const std::size_t cols = p + (with_intercept ? 1 : 0);

    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = p + r;
        std::size_t c = 0;
        if (with_intercept) design(static_cast<Eigen::Index>(r), 0) = 1.0, c = 1;
        for (std::size_t i = 0; i < p; ++i) {
            design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c + i)) =
                z[t - 1 - i];
        }
        target(static_cast<Eigen::Index>(r)) = z[t];
    }

    // Rank-revealing QR tolerates collinear lags (a perfectly differenced
    // ramp makes every column identical); only a non-finite solution is fatal.
    Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
    if (!beta.allFinite()) {
        throw FitError("arima least squares produced non-finite coefficients; "
                       "reduce p or check the series for non-finite values");
    }

    double intercept = with_intercept ? beta(0) : 0.0;
    std::vector<double> coeffs(p);
    for (std::size_t i = 0; i < p; ++i) {
        coeffs[i] = beta(static_cast<Eigen::Index>(i + (with_intercept ? 1 : 0)));
    }
    return std::make_unique<ArimaPredictor>(cfg, intercept, std::move(coeffs));
}

std::unique_ptr<Predictor> arima_from_checkpoint(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("unparseable checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ifcast-predictor" ||
            j.at("kind").get<std::string>() != "arima")
            throw InputError("checkpoint is not an arima predictor");
        if (j.at("version").get<int>() != 1)
            throw InputError("unsupported arima checkpoint version");
        ArimaConfig cfg;
        cfg.p = j.at("config").at("p").get<int>();
        cfg.d = j.at("config").at("d").get<int>();
        cfg.q = j.at("config").at("q").get<int>();
        cfg.validate();
        double intercept = j.at("intercept").get<double>();
        auto coeffs = j.at("coefficients").get<std::vector<double>>();
        if (coeffs.size() != static_cast<std::size_t>(cfg.p))
            throw InputError("arima checkpoint coefficient count does not match p");
        return std::make_unique<ArimaPredictor>(cfg, intercept, std::move(coeffs));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed checkpoint: ") + e.what());
    }
}

} // namespace ifcast
