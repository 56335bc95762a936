#include <doctest.h>

#include <cmath>
#include <vector>

#include "ifcast/cancellation.hpp"
#include "ifcast/errors.hpp"

using namespace ifcast;

namespace {

ComplexTrace make_trace() {
    ComplexTrace t;
    t.label = "interference";
    t.samples = {cplx(1.0, -0.5), cplx(-0.25, 0.75), cplx(0.6, 0.6),
                 cplx(-1.1, 0.2), cplx(0.05, -0.9),  cplx(0.8, 0.3)};
    return t;
}

} // namespace

TEST_SUITE("cancellation") {

TEST_CASE("residual is the elementwise difference over the tail span") {
    ComplexTrace trace = make_trace();
    std::vector<double> pr = {0.1, -0.2, 0.3, 0.4};
    std::vector<double> pi = {-0.6, 0.5, 0.0, -0.1};
    CancellationResult r = cancel(trace, pr, pi);

    CHECK(r.first_slot == 2);
    REQUIRE(r.original.samples.size() == 4);
    REQUIRE(r.residual.samples.size() == 4);
    CHECK(r.original.label == "interference");
    CHECK(r.residual.label == "interference-residual");
    for (std::size_t i = 0; i < 4; ++i) {
        cplx orig = trace.samples[2 + i];
        CHECK(r.original.samples[i] == orig);
        CHECK(r.residual.samples[i] == orig - cplx(pr[i], pi[i]));
    }
}

TEST_CASE("perfect prediction collapses to the suppression cap") {
    ComplexTrace trace = make_trace();
    std::vector<double> pr(4), pi(4);
    for (std::size_t i = 0; i < 4; ++i) {
        pr[i] = trace.samples[2 + i].real();
        pi[i] = trace.samples[2 + i].imag();
    }
    CancellationResult r = cancel(trace, pr, pi);
    CHECK(r.suppression_db == kSuppressionCapDb);
    CHECK(r.real_rmse == 0.0);
    CHECK(r.imag_rmse == 0.0);
    for (const cplx& z : r.residual.samples) CHECK(z == cplx(0.0, 0.0));
}

TEST_CASE("zero prediction achieves exactly zero suppression") {
    ComplexTrace trace = make_trace();
    std::vector<double> zeros(5, 0.0);
    CancellationResult r = cancel(trace, zeros, zeros);
    CHECK(r.suppression_db == 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(r.residual.samples[i] == trace.samples[1 + i]);
    }
}

TEST_CASE("half-amplitude prediction suppresses 10 log10(4) dB") {
    ComplexTrace trace = make_trace();
    std::vector<double> pr(6), pi(6);
    for (std::size_t i = 0; i < 6; ++i) {
        pr[i] = 0.5 * trace.samples[i].real();
        pi[i] = 0.5 * trace.samples[i].imag();
    }
    CancellationResult r = cancel(trace, pr, pi);
    CHECK(r.first_slot == 0);
    CHECK(r.suppression_db ==
          doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("constant real offset shows up in the real RMSE only") {
    ComplexTrace trace = make_trace();
    const double c = 0.35;
    std::vector<double> pr(6), pi(6);
    double orig_power = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        pr[i] = trace.samples[i].real() + c;
        pi[i] = trace.samples[i].imag();
        orig_power += std::norm(trace.samples[i]);
    }
    CancellationResult r = cancel(trace, pr, pi);
    CHECK(r.real_rmse == doctest::Approx(c).epsilon(1e-12));
    CHECK(r.imag_rmse == 0.0);
    double expected = 10.0 * std::log10(orig_power / (6.0 * c * c));
    CHECK(r.suppression_db == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("silent trace with silent prediction reports zero suppression") {
    ComplexTrace silence;
    silence.label = "none";
    silence.samples.assign(4, cplx(0.0, 0.0));
    std::vector<double> zeros(4, 0.0);
    CancellationResult r = cancel(silence, zeros, zeros);
    CHECK(r.suppression_db == 0.0);
}

TEST_CASE("span validation") {
    ComplexTrace trace = make_trace();
    std::vector<double> four(4, 0.0);
    std::vector<double> three(3, 0.0);
    std::vector<double> seven(7, 0.0);
    std::vector<double> empty;
    CHECK_THROWS_AS(cancel(trace, four, three), InputError);
    CHECK_THROWS_AS(cancel(trace, seven, seven), InputError);
    CHECK_THROWS_AS(cancel(trace, empty, empty), InputError);
}

TEST_CASE("end-to-end run is deterministic and spans the validation tail") {
    ScenarioConfig scenario;
    scenario.desired.mean_power_db = 10.0;
    scenario.desired.doppler_ts = 0.05;
    scenario.interferers.resize(1);
    scenario.interferers[0].mean_power_db = 3.0;
    scenario.interferers[0].doppler_ts = 0.05;
    scenario.noise_power = 1.0;
    scenario.trace_length = 160;
    scenario.rng_seed = 3;

    TransformerConfig cfg;
    cfg.window = 8;
    cfg.blocks = 1;
    cfg.heads = 1;
    cfg.head_size = 4;
    cfg.ff_dim = 8;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.dropout = 0.0;
    cfg.seed = 11;

    CancellationResult a = run_cancellation(scenario, cfg, SiftConfig{});
    CancellationResult b = run_cancellation(scenario, cfg, SiftConfig{});

    ComposedScenario composed = compose_received(scenario);
    REQUIRE(a.original.samples.size() == a.residual.samples.size());
    CHECK(a.first_slot + a.original.samples.size() == scenario.trace_length);
    for (std::size_t i = 0; i < a.original.samples.size(); ++i) {
        CHECK(a.original.samples[i] ==
              composed.interference.samples[a.first_slot + i]);
        CHECK(a.residual.samples[i] == b.residual.samples[i]);
    }
    CHECK(a.suppression_db == b.suppression_db);
    CHECK(std::isfinite(a.suppression_db));
    CHECK(a.real_rmse == b.real_rmse);
    CHECK(a.imag_rmse == b.imag_rmse);
}

} // TEST_SUITE
