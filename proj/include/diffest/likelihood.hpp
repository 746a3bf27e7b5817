#pragma once

#include "diffest/types.hpp"

namespace diffest {

/// Quasi-log-likelihood (1/n) sum_j [ theta_j - (1/2) r_j^2 exp(2 theta_j) ].
/// Theta values above 350 are rejected before exponentiation.
double qll(const OrderedSample& sample, const VectorXd& theta_values);

/// Exact integral of |theta^(m)|^2 over the knot range, computed in closed
/// form per interval from the Taylor representation. The integrand vanishes
/// outside the knot range by the natural-spline property.
double penalty(const ThetaSpline& spline);

/// Penalized objective qll - (lambda/2) * penalty.
double pqll(const OrderedSample& sample, const ThetaSpline& spline,
            const PenaltyConfig& config);

}  // namespace diffest
