#include "diffest/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace diffest {

double qll(const OrderedSample& sample, const VectorXd& theta_values) {
  const Eigen::Index n = sample.n();
  if (theta_values.size() != n) {
    throw std::invalid_argument("qll: theta_values length must equal n");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double theta = theta_values(j);
    if (!std::isfinite(theta) || theta > 350.0) {
      throw std::runtime_error("qll: theta value at rank " + std::to_string(j) +
                               " would overflow exp(2 theta)");
    }
    sum += theta - 0.5 * sample.r()(j) * sample.r()(j) * std::exp(2.0 * theta);
  }
  return sum / static_cast<double>(n);
}

double penalty(const ThetaSpline& spline) {
  const int m = spline.order();
  double total = 0.0;
  // On [y_k, y_{k+1}] the m-th derivative is the degree-(m-1) polynomial
  // sum_j c_j s^j with c_j = theta^(m+j)(y_k)/j!; its square integrates to
  // sum_{j,l} c_j c_l h^{j+l+1}/(j+l+1).
  for (Eigen::Index k = 0; k + 1 < spline.n(); ++k) {
    const double h = spline.knots()(k + 1) - spline.knots()(k);
    double fact = 1.0;
    VectorXd c(m);
    for (int j = 0; j < m; ++j) {
      if (j > 0) fact *= static_cast<double>(j);
      c(j) = spline.deriv(k, m + j) / fact;
    }
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < m; ++l) {
        total += c(j) * c(l) * std::pow(h, j + l + 1) /
                 static_cast<double>(j + l + 1);
      }
    }
  }
  return total;
}

double pqll(const OrderedSample& sample, const ThetaSpline& spline,
            const PenaltyConfig& config) {
  if (spline.order() != config.m) {
    throw std::invalid_argument("pqll: spline order must match config.m");
  }
  if (spline.n() != sample.n() ||
      !(spline.knots().array() == sample.y().array()).all()) {
    throw std::invalid_argument("pqll: spline knots must equal sample levels");
  }
  return qll(sample, spline.derivs().col(0)) -
         0.5 * config.lambda * penalty(spline);
}

}  // namespace diffest
