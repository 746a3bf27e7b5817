#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diffest {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Timestamped observations (t_i, Y_i) of one diffusion path.
/// Times are in years, strictly increasing.
class RawSeries {
 public:
  RawSeries(VectorXd times, VectorXd values, std::string label = "");

  const VectorXd& times() const { return times_; }
  const VectorXd& values() const { return values_; }
  const std::string& label() const { return label_; }
  Eigen::Index size() const { return times_.size(); }
  double horizon() const { return times_(times_.size() - 1) - times_(0); }

 private:
  VectorXd times_;
  VectorXd values_;
  std::string label_;
};

/// Scaled returns r_i = (Y_{i} - Y_{i-1}) / sqrt(t_i - t_{i-1}) paired with
/// the level Y_{i-1} at which each was observed.
struct ReturnSeries {
  VectorXd levels;
  VectorXd returns;

  Eigen::Index n() const { return levels.size(); }
};

/// Rank-sorted (level, return) pairs; levels strictly increasing.
class OrderedSample {
 public:
  OrderedSample(VectorXd y, VectorXd r);

  const VectorXd& y() const { return y_; }
  const VectorXd& r() const { return r_; }
  Eigen::Index n() const { return y_.size(); }
  double min_level() const { return y_(0); }
  double max_level() const { return y_(y_.size() - 1); }

 private:
  VectorXd y_;
  VectorXd r_;
};

/// Penalization order m and coefficient lambda.
struct PenaltyConfig {
  int m;
  double lambda;

  PenaltyConfig(int m_, double lambda_);
};

/// Piecewise-polynomial representation of theta on the knot grid: the
/// derivative values of orders 0..2m-1 at every knot, with the order-(2m-1)
/// entry holding the right-continuous value.
class ThetaSpline {
 public:
  // derivs is n x 2m; column i holds the order-i values at each knot.
  ThetaSpline(VectorXd knots, MatrixXd derivs, int m);

  const VectorXd& knots() const { return knots_; }
  const MatrixXd& derivs() const { return derivs_; }
  int order() const { return m_; }
  Eigen::Index n() const { return knots_.size(); }

  double deriv(Eigen::Index knot, int order) const {
    return derivs_(knot, order);
  }

 private:
  void validate() const;

  VectorXd knots_;
  MatrixXd derivs_;
  int m_;
};

/// Choice of penalization coefficient: fixed value, or the schedule
/// kappa * n^(-2m/(2m+1)).
class LambdaRule {
 public:
  static LambdaRule fixed(double lambda);
  static LambdaRule scaled(double kappa);

  double value_for(Eigen::Index n, int m) const;
  bool is_fixed() const { return fixed_; }
  double param() const { return param_; }

 private:
  LambdaRule(bool fixed, double param) : fixed_(fixed), param_(param) {}
  bool fixed_;
  double param_;
};

struct SolverConfig {
  double epsilon = 1e-10;
  double delta = 0.1;
  int max_iter = 500;
  double divergence_bound = 1e10;
  std::vector<int> thinning_factors = {16, 4, 1};
  LambdaRule lambda_rule = LambdaRule::scaled(20.0);

  void validate() const;
};

struct IterationRecord {
  VectorXd a;
  double residual_norm;
};

/// Converged boundary vector with the spline it generates.
struct EstimateResult {
  VectorXd a_star;
  ThetaSpline spline;
  double residual_norm;
  int iterations;
  std::vector<IterationRecord> trace;
  double lambda;  // penalization coefficient actually used
};

}  // namespace diffest
