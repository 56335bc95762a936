#include "ifcast/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace ifcast {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) {
        throw std::invalid_argument("spline needs >= 2 knots with matching values");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("spline knots must be strictly increasing");
        }
    }

    // Tridiagonal system for interior second derivatives (Thomas algorithm);
    // natural boundary: m_0 = m_{n-1} = 0.
    m_.assign(n, 0.0);
    if (n > 2) {
        std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double h0 = x_[i] - x_[i - 1];
            double h1 = x_[i + 1] - x_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < n - 2; ++i) {
            double h = x_[i + 1] - x_[i]; // sub-diagonal entry of row i
            double w = h / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i-- > 0;) {
            double carry = (i + 1 < n - 2) ? upper[i] * m_[i + 2] : 0.0;
            m_[i + 1] = (rhs[i] - carry) / diag[i];
        }
    }
}

double CubicSpline::operator()(double x) const {
    const std::size_t n = x_.size();
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    std::size_t lo = hi - 1;

    double h = x_[hi] - x_[lo];
    double a = (x_[hi] - x) / h;
    double b = (x - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / 6.0;
}

} // namespace ifcast
