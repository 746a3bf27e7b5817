#pragma once

#include <vector>

#include "diffest/types.hpp"

namespace diffest {

/// Evaluate theta or one of its derivatives at x. Outside the knot range the
/// natural-spline tails apply: a degree-(m-1) polynomial extension, so orders
/// >= m vanish there. Order 2m-1 returns the right-continuous value.
double eval_theta(const ThetaSpline& spline, double x, int order);

/// sigma = exp(-theta); strictly positive, exponent guarded.
double eval_sigma(const ThetaSpline& spline, double x);

struct GridPoint {
  double x;
  double sigma;
  bool extrapolated;  // x outside the knot range
};

/// Uniformly spaced sigma values over [lo, hi], endpoints included.
/// Defaults to the knot range.
std::vector<GridPoint> sigma_grid(const ThetaSpline& spline, int points);
std::vector<GridPoint> sigma_grid(const ThetaSpline& spline, int points,
                                  double lo, double hi);

}  // namespace diffest
