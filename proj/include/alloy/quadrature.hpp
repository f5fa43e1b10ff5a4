#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace alloy {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Integral of f over [a, b] split at the given interior breakpoints. Each
/// piece uses double-exponential quadrature, which tolerates integrable
/// endpoint singularities, so singular points of f should be passed as
/// breakpoints.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::vector<double> breakpoints = {}, double tol = 1e-11) {
  QuadratureResult r;
  if (!(b > a)) return r;
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  boost::math::quadrature::tanh_sinh<double> integrator(12);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = breakpoints[i], hi = breakpoints[i + 1];
    if (lo < a || hi > b || !(hi > lo)) continue;
    double err = 0.0, l1 = 0.0;
    const double piece = integrator.integrate(f, lo, hi, tol, &err, &l1);
    r.value += piece;
    r.error += err;
  }
  return r;
}

}  // namespace alloy
