#include "diffest/shooting.hpp"

#include <cmath>
#include <sstream>

namespace diffest {

namespace {

constexpr double kThetaGuard = 350.0;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// In-place Taylor step of a derivative stack over a spacing h: the entry at
// order i becomes sum_{l>=i} state(l) h^{l-i}/(l-i)!. The top order (piecewise
// constant) is left untouched. Horner evaluation per order.
template <typename Scalar>
void taylor_step(Eigen::Ref<VecX<Scalar>> state, Scalar h, int two_m) {
  VecX<Scalar> next(two_m);
  next(two_m - 1) = state(two_m - 1);
  for (int i = 0; i <= two_m - 2; ++i) {
    Scalar acc = state(two_m - 1);
    for (int l = two_m - 2; l >= i; --l) {
      acc = state(l) + acc * h / Scalar(l - i + 1);
    }
    next(i) = acc;
  }
  state = next;
}

template <typename Scalar>
struct Propagated {
  MatX<Scalar> table;
  VecX<Scalar> residual;
  MatX<Scalar> jacobian;
};

template <typename Scalar>
Propagated<Scalar> propagate(const VecX<Scalar>& a, const OrderedSample& sample,
                             const PenaltyConfig& config, bool want_jacobian) {
  const int m = config.m;
  const int two_m = 2 * m;
  const Eigen::Index n = sample.n();
  if (a.size() != m) {
    throw std::invalid_argument("shoot: boundary vector must have length m");
  }
  const Scalar sign_m = (m % 2 == 0) ? Scalar(1) : Scalar(-1);  // (-1)^m
  const Scalar jump_scale = sign_m / (Scalar(n) * Scalar(config.lambda));
  // Sensitivity jump carries the opposite sign and the chain-rule factor 2
  // from differentiating exp(2 Theta).
  const Scalar sens_scale = Scalar(-2) * jump_scale;

  MatX<Scalar> table(n, two_m);
  VecX<Scalar> state = VecX<Scalar>::Zero(two_m);
  state.head(m) = a;

  MatX<Scalar> phi;  // 2m x m sensitivity stacks, column i = d(state)/d a^(i)
  if (want_jacobian) {
    phi = MatX<Scalar>::Zero(two_m, m);
    for (int i = 0; i < m; ++i) phi(i, i) = Scalar(1);
  }

  using std::abs;
  using std::exp;
  using std::isfinite;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0) {
      const Scalar h = Scalar(sample.y()(k)) - Scalar(sample.y()(k - 1));
      taylor_step<Scalar>(state, h, two_m);
      if (want_jacobian) {
        for (int i = 0; i < m; ++i) taylor_step<Scalar>(phi.col(i), h, two_m);
      }
    }
    const Scalar theta = state(0);
    if (!isfinite(theta) || abs(theta) > Scalar(kThetaGuard)) {
      throw ShootDivergence(k, static_cast<double>(theta));
    }
    const Scalar weight =
        Scalar(sample.r()(k)) * Scalar(sample.r()(k)) * exp(Scalar(2) * theta);
    state(two_m - 1) += jump_scale * (Scalar(1) - weight);
    if (want_jacobian) {
      for (int i = 0; i < m; ++i) {
        phi(two_m - 1, i) += sens_scale * weight * phi(0, i);
      }
    }
    table.row(k) = state;
  }

  Propagated<Scalar> out;
  out.table = std::move(table);
  out.residual = state.tail(m);
  if (want_jacobian) {
    // Row i = sensitivity direction a^(i), column j = component F_j.
    out.jacobian = phi.bottomRows(m).transpose();
  }
  return out;
}

}  // namespace

ShootDivergence::ShootDivergence(Eigen::Index knot, double theta_value)
    : std::runtime_error([&] {
        std::ostringstream oss;
        oss << "diverged during shoot: |theta| = " << std::abs(theta_value)
            << " at knot " << knot << " exceeds guard";
        return oss.str();
      }()),
      knot_(knot) {}

ShootResult shoot(const VectorXd& a, const OrderedSample& sample,
                  const PenaltyConfig& config, bool want_jacobian) {
  Propagated<double> p = propagate<double>(a, sample, config, want_jacobian);
  ShootResult result{ThetaSpline(sample.y(), std::move(p.table), config.m),
                     std::move(p.residual), std::move(p.jacobian),
                     want_jacobian};
  return result;
}

ExtendedShootResult shoot_extended(const VectorXl& a,
                                   const OrderedSample& sample,
                                   const PenaltyConfig& config,
                                   bool want_jacobian) {
  Propagated<long double> p =
      propagate<long double>(a, sample, config, want_jacobian);
  return ExtendedShootResult{
      ThetaSpline(sample.y(), p.table.cast<double>(), config.m),
      std::move(p.residual), std::move(p.jacobian), want_jacobian};
}

double first_order_residual(const OrderedSample& sample,
                            const ThetaSpline& spline, double lambda,
                            int power) {
  if (power < 1) {
    throw std::invalid_argument("first_order_residual: power must be >= 1");
  }
  const Eigen::Index n = sample.n();
  const int m = spline.order();
  double knot_sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double theta = spline.deriv(j, 0);
    const double w = sample.r()(j) * sample.r()(j) * std::exp(2.0 * theta);
    knot_sum += std::pow(sample.y()(j), power) * (1.0 - w);
  }
  knot_sum /= static_cast<double>(n);

  // theta^(2m-1) is piecewise constant; integrate against delta'(z) exactly:
  // int_{y_k}^{y_{k+1}} c_k p z^{p-1} dz = c_k (y_{k+1}^p - y_k^p).
  double integral = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double c = spline.deriv(k, 2 * m - 1);
    integral += c * (std::pow(sample.y()(k + 1), power) -
                     std::pow(sample.y()(k), power));
  }
  const double sign = (m % 2 == 1) ? 1.0 : -1.0;  // (-1)^(m-1)
  return knot_sum - sign * lambda * integral;
}

}  // namespace diffest
