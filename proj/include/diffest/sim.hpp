#pragma once

#include <cstdint>
#include <vector>

#include "diffest/types.hpp"

namespace diffest {

/// Exact Brownian path: increments are independent N(0, sigma0^2 dt).
RawSeries simulate_bm(Eigen::Index steps, double dt, double sigma0, double y0,
                      std::uint64_t seed);

/// Logistic transform of an exactly simulated Brownian path:
/// Y_t = exp(W_t - t/2) / (1 + exp(W_t - t/2)), Y_0 = 1/2. Values in (0, 1);
/// the diffusion function of this process is y (1 - y).
RawSeries simulate_logistic(Eigen::Index steps, double dt, std::uint64_t seed);

/// The diffusion function of the logistic path.
double logistic_sigma(double y);

/// Keep every 2^levels-th observation, timestamps preserved.
RawSeries dyadic_reduce(const RawSeries& series, int levels);

/// Root mean-integrated squared error sqrt((T/n) sum (sigma_* - sigma)^2)
/// over the sample's knots.
double rmise(const ThetaSpline& spline, double (*truth)(double),
             const OrderedSample& sample, double horizon_T);

struct StudyRow {
  int q;
  Eigen::Index n;
  double lambda;
  double rmise;
  double log2_rmise;
  bool converged;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  double intercept;  // least-squares fit of log2 rmise on q
  double slope;
  int m;
  bool any_failed;
};

/// Simulate one logistic path at step 2^-base_q over [0,1], estimate on each
/// dyadic reduction down to step 2^-q for q in [q_min, q_max] with
/// lambda = kappa (2^-q)^(2m/(2m+1)), and regress log2 RMISE on q.
StudyReport convergence_study(int base_q, int q_min, int q_max, int m,
                              double kappa, std::uint64_t seed);

}  // namespace diffest
