#ifndef IFCAST_SPLINE_HPP
#define IFCAST_SPLINE_HPP

#include <vector>

namespace ifcast {

// Natural cubic spline through (x_k, y_k) knots: C2 interpolant with zero
// second derivative at both end knots. Knot abscissae must be strictly
// increasing. Evaluation outside the knot range extrapolates the end cubic.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;

private:
    std::vector<double> x_, y_;
    std::vector<double> m_; // second derivatives at knots
};

} // namespace ifcast

#endif
