#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "ifcast/emd.hpp"
#include "ifcast/errors.hpp"
#include "ifcast/rng.hpp"

using namespace ifcast;

namespace {

std::vector<double> sampled(std::size_t n, double (*f)(double)) {
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = f(static_cast<double>(k));
    return s;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(va * vb);
}

double energy(std::span<const double> s) {
    double e = 0.0;
    for (double v : s) e += v * v;
    return e;
}

} // namespace

TEST_SUITE("emd") {

TEST_CASE("find_extrema on canonical tiny shapes") {
    std::vector<double> bump{0.0, 1.0, 0.0};
    Extrema e = find_extrema(bump);
    CHECK(e.maxima == std::vector<std::size_t>{1});
    CHECK(e.minima.empty());

    std::vector<double> ramp{0.0, 1.0, 2.0, 3.0};
    e = find_extrema(ramp);
    CHECK(e.maxima.empty());
    CHECK(e.minima.empty());

    std::vector<double> vee{2.0, 0.0, 2.0};
    e = find_extrema(vee);
    CHECK(e.minima == std::vector<std::size_t>{1});
}

TEST_CASE("find_extrema reports plateau midpoints") {
    std::vector<double> two_wide{0.0, 1.0, 1.0, 0.0};
    Extrema e = find_extrema(two_wide);
    CHECK(e.maxima == std::vector<std::size_t>{1});

    std::vector<double> three_wide{0.0, 1.0, 1.0, 1.0, 0.0};
    e = find_extrema(three_wide);
    CHECK(e.maxima == std::vector<std::size_t>{2});

    std::vector<double> valley{3.0, -1.0, -1.0, -1.0, 0.5};
    e = find_extrema(valley);
    CHECK(e.minima == std::vector<std::size_t>{2});
}

TEST_CASE("find_extrema on a sampled sinusoid matches the analytic peaks") {
    // sin(2*pi*k/16), k = 0..63: maxima at k = 4,20,36,52; minima at 12,28,44,60.
    std::vector<double> s(64);
    for (std::size_t k = 0; k < 64; ++k) {
        s[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / 16.0);
    }
    Extrema e = find_extrema(s);
    CHECK(e.maxima == std::vector<std::size_t>{4, 20, 36, 52});
    CHECK(e.minima == std::vector<std::size_t>{12, 28, 44, 60});
}

TEST_CASE("count_zero_crossings counts sign changes and skips exact zeros") {
    CHECK(count_zero_crossings(std::vector<double>{1.0, -1.0, 1.0, -1.0}) == 3);
    CHECK(count_zero_crossings(std::vector<double>{1.0, 0.0, -1.0}) == 1);
    CHECK(count_zero_crossings(std::vector<double>{0.0, 0.0, 0.0}) == 0);
    CHECK(count_zero_crossings(std::vector<double>{-2.0, -1.0, 1.0, 2.0}) == 1);
}

TEST_CASE("envelope degenerate anchor counts") {
    std::vector<double> s{5.0, 1.0, 4.0, 2.0, 3.0};
    std::vector<std::size_t> one{2};
    std::vector<double> env = envelope(s, one, BoundaryPolicy::Mirror);
    for (double v : env) CHECK(v == 4.0);

    std::vector<std::size_t> two{1, 3};
    env = envelope(s, two, BoundaryPolicy::Mirror);
    // Straight line through (1,1) and (3,2), extended to the full index range.
    CHECK(env[0] == doctest::Approx(0.5));
    CHECK(env[1] == doctest::Approx(1.0));
    CHECK(env[2] == doctest::Approx(1.5));
    CHECK(env[3] == doctest::Approx(2.0));
    CHECK(env[4] == doctest::Approx(2.5));

    std::vector<std::size_t> none;
    CHECK_THROWS_AS(envelope(s, none, BoundaryPolicy::Mirror), InputError);
}

TEST_CASE("envelope through every index reproduces the series") {
    std::vector<double> s{0.3, -1.0, 2.2, 0.9, -0.4, 1.7, 0.0, 0.8};
    std::vector<std::size_t> all(s.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (BoundaryPolicy policy : {BoundaryPolicy::Mirror, BoundaryPolicy::Clamp}) {
        std::vector<double> env = envelope(s, all, policy);
        for (std::size_t t = 0; t < s.size(); ++t) {
            CHECK(env[t] == doctest::Approx(s[t]).epsilon(1e-10));
        }
    }
}

TEST_CASE("upper envelope of a flat-peak sinusoid dominates the series") {
    // Peaks all equal 1, so the spline through them is the constant 1.
    std::vector<double> s(64);
    for (std::size_t k = 0; k < 64; ++k) {
        s[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / 16.0);
    }
    Extrema e = find_extrema(s);
    std::vector<double> env = envelope(s, e.maxima, BoundaryPolicy::Mirror);
    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(env[t] >= s[t] - 1e-9);
    }
    // Anchors are interpolated exactly.
    for (std::size_t a : e.maxima) {
        CHECK(env[a] == doctest::Approx(s[a]).epsilon(1e-10));
    }
}

TEST_CASE("decompose leaves monotone and constant series untouched") {
    std::vector<double> ramp(20);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    Decomposition d = decompose(ramp);
    CHECK(d.imfs.empty());
    CHECK(d.residual == ramp);
    CHECK(d.source_length == 20);

    std::vector<double> flat(20, 3.3);
    d = decompose(flat);
    CHECK(d.imfs.empty());
    CHECK(d.residual == flat);
}

TEST_CASE("decompose separates a fast tone from a slow tone") {
    // sin(2*pi*0.2 k) + sin(2*pi*0.02 k), k = 0..499.
    const std::size_t n = 500;
    std::vector<double> fast(n), slow(n), s(n);
    for (std::size_t k = 0; k < n; ++k) {
        fast[k] = std::sin(2.0 * std::numbers::pi * 0.2 * static_cast<double>(k));
        slow[k] = std::sin(2.0 * std::numbers::pi * 0.02 * static_cast<double>(k));
        s[k] = fast[k] + slow[k];
    }
    Decomposition d = decompose(s);
    REQUIRE(!d.imfs.empty());
    CHECK(reconstruction_error(s, d) < 1e-9);
    CHECK(correlation(d.imfs[0], fast) > 0.95);

    std::vector<double> rest(n, 0.0);
    for (std::size_t j = 1; j < d.imfs.size(); ++j) {
        for (std::size_t t = 0; t < n; ++t) rest[t] += d.imfs[j][t];
    }
    for (std::size_t t = 0; t < n; ++t) rest[t] += d.residual[t];
    CHECK(correlation(rest, slow) > 0.95);

    // Frequency ordering: later components oscillate no faster.
    std::size_t prev = count_zero_crossings(d.imfs[0]);
    for (std::size_t j = 1; j < d.imfs.size(); ++j) {
        std::size_t cur = count_zero_crossings(d.imfs[j]);
        CHECK(cur <= prev);
        prev = cur;
    }

    // IMF well-formedness: extrema and zero-crossing counts differ by <= 1,
    // with a small allowance for boundary artifacts.
    for (const auto& imf : d.imfs) {
        Extrema e = find_extrema(imf);
        auto extrema = static_cast<long>(e.maxima.size() + e.minima.size());
        auto crossings = static_cast<long>(count_zero_crossings(imf));
        CHECK(std::abs(extrema - crossings) <= 3);
    }

    // Residual satisfies the stop condition (< 3 extrema).
    Extrema er = find_extrema(d.residual);
    CHECK(er.maxima.size() + er.minima.size() < 3);
}

TEST_CASE("decomposing a pure IMF is near idempotent") {
    const std::size_t n = 256;
    std::vector<double> tone(n);
    for (std::size_t k = 0; k < n; ++k) {
        tone[k] = std::sin(2.0 * std::numbers::pi * 0.1 * static_cast<double>(k));
    }
    Decomposition d = decompose(tone);
    REQUIRE(!d.imfs.empty());
    CHECK(correlation(d.imfs[0], tone) > 0.99);
    double rest_energy = energy(d.residual);
    for (std::size_t j = 1; j < d.imfs.size(); ++j) rest_energy += energy(d.imfs[j]);
    CHECK(rest_energy < 0.01 * energy(tone));
}

TEST_CASE("decompose reconstructs seeded random smooth signals exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 200;
        std::vector<double> s(n, 0.0);
        // Random smooth mixture: a few sinusoids with random phases + drift.
        for (int tone = 0; tone < 4; ++tone) {
            double freq = 0.01 + 0.4 * rng.next_double();
            double amp = 0.3 + rng.next_double();
            double phase = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
            for (std::size_t k = 0; k < n; ++k) {
                s[k] += amp * std::sin(2.0 * std::numbers::pi * freq * k + phase);
            }
        }
        for (std::size_t k = 0; k < n; ++k) s[k] += 0.01 * static_cast<double>(k);
        Decomposition d = decompose(s);
        CHECK(reconstruction_error(s, d) < 1e-9);
        for (const auto& imf : d.imfs) CHECK(imf.size() == n);
        CHECK(d.residual.size() == n);
    }
}

TEST_CASE("decompose validates its inputs") {
    std::vector<double> tiny(7, 1.0);
    CHECK_THROWS_AS(decompose(tiny), InputError);
    std::vector<double> ok(50, 1.0);
    SiftConfig bad;
    bad.max_imfs = 0;
    CHECK_THROWS_AS(decompose(ok, bad), ConfigError);
    bad = SiftConfig{};
    bad.sd_threshold = 0.0;
    CHECK_THROWS_AS(decompose(ok, bad), ConfigError);
}

TEST_CASE("max_imfs caps the number of extracted components") {
    const std::size_t n = 300;
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = std::sin(2.0 * std::numbers::pi * 0.3 * static_cast<double>(k)) +
               std::sin(2.0 * std::numbers::pi * 0.07 * static_cast<double>(k)) +
               std::sin(2.0 * std::numbers::pi * 0.011 * static_cast<double>(k));
    }
    SiftConfig cfg;
    cfg.max_imfs = 1;
    Decomposition d = decompose(s, cfg);
    CHECK(d.imfs.size() == 1);
    CHECK(reconstruction_error(s, d) < 1e-9);
}

} // TEST_SUITE
