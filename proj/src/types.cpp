#include "diffest/types.hpp"

#include <cmath>
#include <sstream>

namespace diffest {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

RawSeries::RawSeries(VectorXd times, VectorXd values, std::string label)
    : times_(std::move(times)),
      values_(std::move(values)),
      label_(std::move(label)) {
  require(times_.size() == values_.size(),
          "RawSeries: times and values must have equal length");
  require(times_.size() >= 2, "RawSeries: need at least 2 observations");
  for (Eigen::Index i = 0; i < times_.size(); ++i) {
    require(std::isfinite(times_(i)) && std::isfinite(values_(i)),
            "RawSeries: non-finite entry at index " + std::to_string(i));
    if (i > 0) {
      require(times_(i) > times_(i - 1),
              "RawSeries: times not strictly increasing at index " +
                  std::to_string(i));
    }
  }
}

OrderedSample::OrderedSample(VectorXd y, VectorXd r)
    : y_(std::move(y)), r_(std::move(r)) {
  require(y_.size() == r_.size(),
          "OrderedSample: y and r must have equal length");
  require(y_.size() >= 1, "OrderedSample: need at least one pair");
  for (Eigen::Index j = 1; j < y_.size(); ++j) {
    require(y_(j) > y_(j - 1),
            "OrderedSample: levels not strictly increasing at rank " +
                std::to_string(j) + "; break ties upstream");
  }
}

PenaltyConfig::PenaltyConfig(int m_, double lambda_) : m(m_), lambda(lambda_) {
  require(m >= 1, "PenaltyConfig: m must be >= 1");
  require(lambda > 0.0 && std::isfinite(lambda),
          "PenaltyConfig: lambda must be positive and finite");
}

ThetaSpline::ThetaSpline(VectorXd knots, MatrixXd derivs, int m)
    : knots_(std::move(knots)), derivs_(std::move(derivs)), m_(m) {
  require(m_ >= 1, "ThetaSpline: m must be >= 1");
  require(derivs_.rows() == knots_.size(),
          "ThetaSpline: one derivative row per knot required");
  require(derivs_.cols() == 2 * m_,
          "ThetaSpline: derivative table must have 2m columns");
  for (Eigen::Index k = 1; k < knots_.size(); ++k) {
    require(knots_(k) > knots_(k - 1),
            "ThetaSpline: knots not strictly increasing at index " +
                std::to_string(k));
  }
  validate();
}

void ThetaSpline::validate() const {
  const int two_m = 2 * m_;
  // Natural-spline left boundary: orders m..2m-2 vanish at the first knot.
  for (int i = m_; i <= two_m - 2; ++i) {
    if (std::abs(derivs_(0, i)) > 1e-12) {
      throw std::invalid_argument(
          "ThetaSpline: order-" + std::to_string(i) +
          " derivative at the first knot must be 0 (natural spline)");
    }
  }
  // Continuity of orders 0..2m-2: the Taylor polynomial at y_k evaluated at
  // y_{k+1} must reproduce the stored values there.
  for (Eigen::Index k = 0; k + 1 < knots_.size(); ++k) {
    const double h = knots_(k + 1) - knots_(k);
    for (int i = 0; i <= two_m - 2; ++i) {
      double acc = derivs_(k, two_m - 1);
      for (int l = two_m - 2; l >= i; --l) {
        acc = derivs_(k, l) + acc * h / static_cast<double>(l - i + 1);
      }
      const double stored = derivs_(k + 1, i);
      const double tol = 1e-9 * (1.0 + std::abs(stored));
      if (std::abs(acc - stored) > tol) {
        std::ostringstream oss;
        oss << "ThetaSpline: discontinuity of order " << i << " at knot "
            << (k + 1) << " (propagated " << acc << ", stored " << stored
            << ")";
        throw std::invalid_argument(oss.str());
      }
    }
  }
}

LambdaRule LambdaRule::fixed(double lambda) {
  require(lambda > 0.0, "LambdaRule: fixed lambda must be positive");
  return LambdaRule(true, lambda);
}

LambdaRule LambdaRule::scaled(double kappa) {
  require(kappa > 0.0, "LambdaRule: kappa must be positive");
  return LambdaRule(false, kappa);
}

double LambdaRule::value_for(Eigen::Index n, int m) const {
  if (fixed_) return param_;
  const double md = static_cast<double>(m);
  const double expo = -2.0 * md / (2.0 * md + 1.0);
  return param_ * std::pow(static_cast<double>(n), expo);
}

void SolverConfig::validate() const {
  require(epsilon > 0.0, "SolverConfig: epsilon must be positive");
  require(delta > 0.0 && delta <= 1.0, "SolverConfig: delta must be in (0,1]");
  require(max_iter >= 1, "SolverConfig: max_iter must be >= 1");
  require(divergence_bound > 0.0,
          "SolverConfig: divergence_bound must be positive");
  require(!thinning_factors.empty() && thinning_factors.back() == 1,
          "SolverConfig: thinning_factors must end with 1");
  for (int s : thinning_factors) {
    require(s >= 1, "SolverConfig: thinning factors must be positive");
  }
}

}  // namespace diffest
