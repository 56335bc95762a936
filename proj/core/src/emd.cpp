#include "ifcast/emd.hpp"

#include <algorithm>
#include <cmath>

#include "ifcast/errors.hpp"
#include "ifcast/spline.hpp"

namespace ifcast {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Mirror anchor points across the first/last sample index so the spline has
// support beyond both ends. Up to two anchors are reflected per side.
void extend_anchors(std::span<const double> series,
                    std::span<const std::size_t> anchors, BoundaryPolicy policy,
                    std::vector<double>& xs, std::vector<double>& ys) {
    const double last = static_cast<double>(series.size() - 1);
    xs.clear();
    ys.clear();

    if (policy == BoundaryPolicy::Mirror) {
        // Reflect the first (up to two) anchors across index 0; walking them
        // farthest-first keeps the knot list ascending.
        for (std::size_t k = std::min<std::size_t>(2, anchors.size()); k-- > 0;) {
            double a = static_cast<double>(anchors[k]);
            if (a > 0.0) {
                xs.push_back(-a);
                ys.push_back(series[anchors[k]]);
            }
        }
    } else {
        if (anchors.front() != 0) {
            xs.push_back(0.0);
            ys.push_back(series[anchors.front()]);
        }
    }

    for (std::size_t a : anchors) {
        xs.push_back(static_cast<double>(a));
        ys.push_back(series[a]);
    }

    if (policy == BoundaryPolicy::Mirror) {
        // Reflect the last (up to two) anchors across the final index; the
        // nearest anchor mirrors closest, so walk them in reverse order.
        std::size_t take = std::min<std::size_t>(2, anchors.size());
        for (std::size_t j = 0; j < take; ++j) {
            std::size_t idx = anchors.size() - 1 - j;
            double a = static_cast<double>(anchors[idx]);
            if (a < last) {
                xs.push_back(2.0 * last - a);
                ys.push_back(series[anchors[idx]]);
            }
        }
    } else {
        if (static_cast<double>(anchors.back()) != last) {
            xs.push_back(last);
            ys.push_back(series[anchors.back()]);
        }
    }
}

} // namespace

Extrema find_extrema(std::span<const double> series) {
    Extrema out;
    const std::size_t n = series.size();
    if (n < 3) return out;

    int prev_dir = 0;
    std::size_t plateau_start = 0; // first index of the run of equal values
    for (std::size_t i = 0; i + 1 < n; ++i) {
        int dir = sign_of(series[i + 1] - series[i]);
        if (dir == 0) continue;
        if (prev_dir == 1 && dir == -1) {
            out.maxima.push_back((plateau_start + i) / 2);
        } else if (prev_dir == -1 && dir == 1) {
            out.minima.push_back((plateau_start + i) / 2);
        }
        prev_dir = dir;
        plateau_start = i + 1;
    }
    return out;
}

std::vector<double> envelope(std::span<const double> series,
                             std::span<const std::size_t> anchors,
                             BoundaryPolicy policy) {
    const std::size_t n = series.size();
    if (anchors.empty()) {
        throw InputError("envelope: no anchor points (degenerate, stop sifting)");
    }
    std::vector<double> env(n);
    if (anchors.size() == 1) {
        std::fill(env.begin(), env.end(), series[anchors[0]]);
        return env;
    }
    if (anchors.size() == 2) {
        double x0 = static_cast<double>(anchors[0]);
        double x1 = static_cast<double>(anchors[1]);
        double y0 = series[anchors[0]];
        double y1 = series[anchors[1]];
        double slope = (y1 - y0) / (x1 - x0);
        for (std::size_t t = 0; t < n; ++t) {
            env[t] = y0 + slope * (static_cast<double>(t) - x0);
        }
        return env;
    }

    std::vector<double> xs, ys;
    extend_anchors(series, anchors, policy, xs, ys);
    CubicSpline spline(std::move(xs), std::move(ys));
    for (std::size_t t = 0; t < n; ++t) {
        env[t] = spline(static_cast<double>(t));
    }
    return env;
}

Decomposition decompose(std::span<const double> series, const SiftConfig& cfg) {
    if (series.size() < 8) {
        throw InputError("decompose: series must have at least 8 samples");
    }
    if (cfg.max_imfs < 1 || !(cfg.sd_threshold > 0.0)) {
        throw ConfigError("decompose: max_imfs >= 1 and sd_threshold > 0 required");
    }

    const std::size_t n = series.size();
    Decomposition out;
    out.source_length = n;

    std::vector<double> remainder(series.begin(), series.end());
    std::vector<double> h, next;
    for (int imf_idx = 0; imf_idx < cfg.max_imfs; ++imf_idx) {
        Extrema ext = find_extrema(remainder);
        if (ext.maxima.size() + ext.minima.size() < 3) break;

        h = remainder;
        for (int iter = 0; iter < cfg.max_sift_iterations; ++iter) {
            Extrema eh = find_extrema(h);
            if (eh.maxima.empty() || eh.minima.empty()) break;

            std::vector<double> upper = envelope(h, eh.maxima, cfg.boundary_policy);
            std::vector<double> lower = envelope(h, eh.minima, cfg.boundary_policy);

            next.resize(n);
            double num = 0.0, den = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                double mean = 0.5 * (upper[t] + lower[t]);
                next[t] = h[t] - mean;
                num += mean * mean;
                den += h[t] * h[t];
            }
            h.swap(next);
            if (den <= 0.0 || num / den < cfg.sd_threshold) break;
        }

        for (std::size_t t = 0; t < n; ++t) remainder[t] -= h[t];
        out.imfs.push_back(h);
    }

    out.residual = std::move(remainder);
    return out;
}

double reconstruction_error(std::span<const double> series, const Decomposition& d) {
    double worst = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        double sum = d.residual[t];
        for (const auto& imf : d.imfs) sum += imf[t];
        worst = std::max(worst, std::abs(series[t] - sum));
    }
    return worst;
}

std::size_t count_zero_crossings(std::span<const double> series) {
    std::size_t count = 0;
    int prev = 0;
    for (double v : series) {
        int s = sign_of(v);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++count;
        prev = s;
    }
    return count;
}

} // namespace ifcast
