#include "diffest/solver.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "diffest/preprocess.hpp"
#include "diffest/shooting.hpp"
#include "diffest/spline.hpp"

namespace diffest {

namespace {

// Newton has stalled: the update no longer moves a at double resolution, yet
// |F| sits above the tolerance. Re-run the iteration in extended precision,
// where the boundary vector has spare resolution, and keep the best iterate.
EstimateResult polish_extended(const VectorXd& a_seed, ShootResult&& stalled,
                               double stalled_fnorm, int iter,
                               std::vector<IterationRecord>&& trace,
                               const OrderedSample& sample,
                               const PenaltyConfig& config,
                               const SolverConfig& solver) {
  VectorXl a = a_seed.cast<long double>();
  VectorXd best_a = a_seed;
  ThetaSpline best_spline = std::move(stalled.spline);
  double best_f = stalled_fnorm;
  for (int p = 0; p < 40 && best_f >= solver.epsilon; ++p) {
    std::optional<ExtendedShootResult> ex;
    try {
      ex.emplace(shoot_extended(a, sample, config, true));
    } catch (const ShootDivergence&) {
      break;
    }
    const double f = static_cast<double>(ex->boundary_residual.norm());
    if (f < best_f) {
      best_f = f;
      best_a = a.cast<double>();
      best_spline = std::move(ex->spline);
    }
    const VectorXl step =
        ex->jacobian.transpose().fullPivLu().solve(ex->boundary_residual);
    if (step.lpNorm<Eigen::Infinity>() <=
        1e-19L * (1.0L + a.lpNorm<Eigen::Infinity>())) {
      break;
    }
    a -= step;
  }
  trace.push_back({best_a, best_f});
  return EstimateResult{best_a, std::move(best_spline), best_f,
                        iter,   std::move(trace),       config.lambda};
}

}  // namespace

double lambda_schedule(Eigen::Index n, int m, double kappa) {
  if (n < 1 || m < 1 || kappa <= 0.0) {
    throw std::invalid_argument("lambda_schedule: need n >= 1, m >= 1, kappa > 0");
  }
  return LambdaRule::scaled(kappa).value_for(n, m);
}

VectorXd default_seed(const OrderedSample& sample, int m) {
  const double rms =
      std::sqrt(sample.r().squaredNorm() / static_cast<double>(sample.n()));
  VectorXd seed = VectorXd::Zero(m);
  seed(0) = (rms > 0.0) ? -std::log(rms) : 0.0;
  return seed;
}

EstimateResult newton_solve(const OrderedSample& sample,
                            const PenaltyConfig& config,
                            const SolverConfig& solver,
                            const VectorXd& seed_a) {
  solver.validate();
  const int m = config.m;
  if (sample.n() < m) {
    throw std::invalid_argument(
        "newton_solve: need at least m observations to pin down the boundary");
  }

  VectorXd a = seed_a;

  // The forward shoot overflows for boundary levels above a data-dependent
  // threshold (the squared-return feedback term grows without bound).  If the
  // seed lands in that region, lower the level component until the shoot
  // survives; Newton then approaches the root from the stable side.
  for (int repair = 0;; ++repair) {
    try {
      shoot(a, sample, config, false);
      break;
    } catch (const ShootDivergence& e) {
      if (repair >= 400) {
        throw Diverged(std::string("newton_solve: seed unrecoverable: ") +
                       e.what());
      }
      a(0) -= 0.25;
    }
  }

  std::vector<IterationRecord> trace;
  VectorXd best_a = a;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= solver.max_iter; ++iter) {
    std::optional<ShootResult> res;
    try {
      res.emplace(shoot(a, sample, config, true));
    } catch (const ShootDivergence& e) {
      throw Diverged(std::string("newton_solve: ") + e.what());
    }
    const double fnorm = res->boundary_residual.norm();
    trace.push_back({a, fnorm});
    if (fnorm < best_residual) {
      best_residual = fnorm;
      best_a = a;
    }
    if (fnorm < solver.epsilon) {
      return EstimateResult{a,          std::move(res->spline), fnorm,
                            iter,       std::move(trace),       config.lambda};
    }
    if (!std::isfinite(fnorm) || fnorm > solver.divergence_bound) {
      std::ostringstream oss;
      oss << "newton_solve: diverged, |F| = " << fnorm << " at iteration "
          << iter;
      throw Diverged(oss.str());
    }

    // jacobian(i, j) = dF_j/da^(i); Newton needs the transpose system.
    const MatrixXd jac_t = res->jacobian.transpose();
    Eigen::JacobiSVD<MatrixXd> svd(jac_t,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(m - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > 1e14) {
      throw SingularJacobian("newton_solve: singular jacobian (condition > 1e14)");
    }
    const VectorXd step = svd.solve(res->boundary_residual);
    double damp = (fnorm < 1e-4) ? 1.0 : solver.delta;

    // The shoot amplifies perturbations of a by many orders of magnitude, so
    // near the root the update can fall below the resolution of a itself
    // while |F| still sits above the requested tolerance.  Once the step no
    // longer moves a, this is the best attainable answer.
    if (damp * step.lpNorm<Eigen::Infinity>() <=
        1e-15 * (1.0 + a.lpNorm<Eigen::Infinity>())) {
      return polish_extended(a, std::move(*res), fnorm, iter, std::move(trace),
                             sample, config, solver);
    }

    // Backtrack if the full update lands in the overflow region.
    for (;;) {
      const VectorXd trial = a - damp * step;
      try {
        shoot(trial, sample, config, false);
        a = trial;
        break;
      } catch (const ShootDivergence& e) {
        damp *= 0.5;
        if (damp < 1e-8) {
          throw Diverged(std::string("newton_solve: no admissible step: ") +
                         e.what());
        }
      }
    }
  }

  std::ostringstream oss;
  oss << "newton_solve: max iterations exceeded (" << solver.max_iter
      << "); best residual " << best_residual;
  throw MaxIterationsExceeded(oss.str(), best_a, best_residual);
}

namespace {

RawSeries thin_by_stride(const RawSeries& series, int stride) {
  const Eigen::Index count = (series.size() - 1) / stride + 1;
  VectorXd t(count), v(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    t(i) = series.times()(i * stride);
    v(i) = series.values()(i * stride);
  }
  return RawSeries(std::move(t), std::move(v), series.label());
}

}  // namespace

EstimateResult continuation_solve(const RawSeries& series, int m,
                                  const SolverConfig& solver) {
  solver.validate();
  const int max_stride =
      *std::max_element(solver.thinning_factors.begin(),
                        solver.thinning_factors.end());
  if (series.size() - 1 < static_cast<Eigen::Index>(m) * max_stride) {
    throw std::invalid_argument(
        "continuation_solve: sample too small for the coarsest thinning level");
  }

  std::optional<EstimateResult> result;
  for (int stride : solver.thinning_factors) {
    const RawSeries sub = thin_by_stride(series, stride);
    const OrderedSample ordered = order_sample(compute_returns(sub));
    const double lambda = solver.lambda_rule.value_for(ordered.n(), m);
    // Seed from the previous level's spline evaluated at this level's first
    // knot; the boundary vector is anchored there, not at the coarse one.
    VectorXd a(m);
    if (result) {
      for (int i = 0; i < m; ++i) {
        a(i) = eval_theta(result->spline, ordered.min_level(), i);
      }
    } else {
      a = default_seed(ordered, m);
    }
    try {
      result.emplace(newton_solve(ordered, PenaltyConfig(m, lambda), solver, a));
    } catch (const SolverError& e) {
      std::ostringstream oss;
      oss << "continuation_solve: failure at thinning stride " << stride << ": "
          << e.what();
      throw SolverError(oss.str());
    }
    a = result->a_star;
  }
  return *result;
}

}  // namespace diffest
