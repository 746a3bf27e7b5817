#pragma once

#include "diffest/types.hpp"

namespace diffest {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularJacobian : public SolverError {
 public:
  using SolverError::SolverError;
};

class MaxIterationsExceeded : public SolverError {
 public:
  MaxIterationsExceeded(std::string msg, VectorXd best_a, double best_residual)
      : SolverError(std::move(msg)),
        best_a_(std::move(best_a)),
        best_residual_(best_residual) {}
  const VectorXd& best_a() const { return best_a_; }
  double best_residual() const { return best_residual_; }

 private:
  VectorXd best_a_;
  double best_residual_;
};

class Diverged : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Penalization coefficient schedule kappa * n^(-2m/(2m+1)).
double lambda_schedule(Eigen::Index n, int m, double kappa);

/// Default boundary seed: a^(0) = -log(rms of the returns), higher
/// coordinates 0. Exact at the constant-volatility fixed point.
VectorXd default_seed(const OrderedSample& sample, int m);

/// Damped Newton iteration a <- a - delta * Phi^{-1} F until |F| < epsilon.
/// A full step is taken once |F| drops below 1e-4.
EstimateResult newton_solve(const OrderedSample& sample,
                            const PenaltyConfig& config,
                            const SolverConfig& solver, const VectorXd& seed_a);

/// Thinning continuation: solve on progressively denser time-subsamples of
/// the raw series, each level seeded with the previous root; lambda per level
/// comes from solver.lambda_rule with that level's sample size. Returns the
/// finest-level result.
EstimateResult continuation_solve(const RawSeries& series, int m,
                                  const SolverConfig& solver);

}  // namespace diffest
