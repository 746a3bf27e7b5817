#include "diffest/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "diffest/preprocess.hpp"
#include "diffest/solver.hpp"

namespace diffest {

namespace {

VectorXd brownian_path(Eigen::Index steps, double dt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
  VectorXd w(steps + 1);
  w(0) = 0.0;
  for (Eigen::Index i = 1; i <= steps; ++i) w(i) = w(i - 1) + gauss(rng);
  return w;
}

}  // namespace

RawSeries simulate_bm(Eigen::Index steps, double dt, double sigma0, double y0,
                      std::uint64_t seed) {
  if (steps < 1 || dt <= 0.0 || sigma0 <= 0.0) {
    throw std::invalid_argument("simulate_bm: need steps >= 1, dt > 0, sigma0 > 0");
  }
  const VectorXd w = brownian_path(steps, dt, seed);
  VectorXd t(steps + 1), v(steps + 1);
  for (Eigen::Index i = 0; i <= steps; ++i) {
    t(i) = static_cast<double>(i) * dt;
    v(i) = y0 + sigma0 * w(i);
  }
  return RawSeries(std::move(t), std::move(v), "bm");
}

RawSeries simulate_logistic(Eigen::Index steps, double dt, std::uint64_t seed) {
  if (steps < 1 || dt <= 0.0) {
    throw std::invalid_argument("simulate_logistic: need steps >= 1, dt > 0");
  }
  const VectorXd w = brownian_path(steps, dt, seed);
  VectorXd t(steps + 1), v(steps + 1);
  for (Eigen::Index i = 0; i <= steps; ++i) {
    t(i) = static_cast<double>(i) * dt;
    const double z = w(i) - t(i) / 2.0;
    // 1 / (1 + exp(-z)) evaluated stably on both sides.
    v(i) = (z >= 0.0) ? 1.0 / (1.0 + std::exp(-z))
                      : std::exp(z) / (1.0 + std::exp(z));
  }
  return RawSeries(std::move(t), std::move(v), "logistic");
}

double logistic_sigma(double y) { return y * (1.0 - y); }

RawSeries dyadic_reduce(const RawSeries& series, int levels) {
  if (levels < 1) {
    throw std::invalid_argument("dyadic_reduce: levels must be >= 1");
  }
  const Eigen::Index stride = Eigen::Index(1) << levels;
  if ((series.size() - 1) % stride != 0) {
    throw std::invalid_argument(
        "dyadic_reduce: (length - 1) must be divisible by 2^levels");
  }
  const Eigen::Index count = (series.size() - 1) / stride + 1;
  VectorXd t(count), v(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    t(i) = series.times()(i * stride);
    v(i) = series.values()(i * stride);
  }
  return RawSeries(std::move(t), std::move(v), series.label());
}

double rmise(const ThetaSpline& spline, double (*truth)(double),
             const OrderedSample& sample, double horizon_T) {
  if (spline.n() != sample.n()) {
    throw std::invalid_argument("rmise: sample must match spline knots");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < sample.n(); ++j) {
    const double est = std::exp(-spline.deriv(j, 0));
    const double diff = est - truth(sample.y()(j));
    sum += diff * diff;
  }
  return std::sqrt(horizon_T * sum / static_cast<double>(sample.n()));
}

StudyReport convergence_study(int base_q, int q_min, int q_max, int m,
                              double kappa, std::uint64_t seed) {
  if (!(q_min <= q_max && q_max <= base_q)) {
    throw std::invalid_argument("convergence_study: need q_min <= q_max <= base_q");
  }
  if (m != 1 && m != 2) {
    throw std::invalid_argument("convergence_study: m must be 1 or 2");
  }
  const Eigen::Index base_steps = Eigen::Index(1) << base_q;
  const RawSeries base =
      simulate_logistic(base_steps, std::pow(2.0, -base_q), seed);

  SolverConfig solver;
  solver.lambda_rule = LambdaRule::scaled(kappa);

  StudyReport report;
  report.m = m;
  report.any_failed = false;
  for (int q = q_min; q <= q_max; ++q) {
    const RawSeries reduced =
        (q == base_q) ? base : dyadic_reduce(base, base_q - q);
    const Eigen::Index n = reduced.size() - 1;
    const double lambda = solver.lambda_rule.value_for(n, m);
    StudyRow row{q, n, lambda, 0.0, 0.0, false};
    try {
      const EstimateResult est = continuation_solve(reduced, m, solver);
      const OrderedSample ordered = order_sample(compute_returns(reduced));
      row.rmise = rmise(est.spline, &logistic_sigma, ordered, base.horizon());
      row.log2_rmise = std::log2(row.rmise);
      row.converged = true;
    } catch (const SolverError&) {
      report.any_failed = true;
    }
    report.rows.push_back(row);
  }

  // OLS fit of log2 rmise on q over the converged rows.
  double sq = 0.0, sy = 0.0, sqq = 0.0, sqy = 0.0;
  int count = 0;
  for (const StudyRow& row : report.rows) {
    if (!row.converged) continue;
    sq += row.q;
    sy += row.log2_rmise;
    sqq += static_cast<double>(row.q) * row.q;
    sqy += row.q * row.log2_rmise;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sqq - sq * sq;
    report.slope = (count * sqy - sq * sy) / denom;
    report.intercept = (sy - report.slope * sq) / count;
  } else if (count == 1) {
    report.slope = 0.0;
    report.intercept = sy;
  } else {
    report.slope = std::numeric_limits<double>::quiet_NaN();
    report.intercept = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace diffest
