#pragma once

#include "diffest/types.hpp"

namespace diffest {

/// Forward propagation overflowed: theta left the representable range at a
/// knot, usually because the current boundary guess is far from the root.
/// Thinning the sample or reseeding is the usual remedy.
class ShootDivergence : public std::runtime_error {
 public:
  ShootDivergence(Eigen::Index knot, double theta_value);
  Eigen::Index knot() const { return knot_; }

 private:
  Eigen::Index knot_;
};

struct ShootResult {
  ThetaSpline spline;
  VectorXd boundary_residual;  // F(a): orders m..2m-1 at the last knot
  MatrixXd jacobian;  // entry (i,j) = dF_j / da^(i); empty unless requested
  bool has_jacobian;
};

/// Propagate the spline family Theta(.;a) across the ordered sample: the m
/// boundary derivatives at the first knot are a, orders m..2m-2 start at
/// zero, and the order-(2m-1) derivative jumps at each knot by
/// ((-1)^m / (n lambda)) (1 - r_k^2 exp(2 Theta(y_k))). Between knots all
/// orders follow the Taylor step of the degree-(2m-1) polynomial. When
/// requested, sensitivities with respect to a are propagated alongside and
/// assembled into the Jacobian of F.
ShootResult shoot(const VectorXd& a, const OrderedSample& sample,
                  const PenaltyConfig& config, bool want_jacobian);

using VectorXl = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct ExtendedShootResult {
  ThetaSpline spline;  // derivative table rounded back to double
  VectorXl boundary_residual;
  MatrixXl jacobian;
  bool has_jacobian;
};

/// Same propagation carried out in extended precision. For large samples the
/// residual F is so sensitive to a that its smallest magnitude over adjacent
/// double-representable boundary vectors can exceed the solver tolerance;
/// polishing the root in long double pushes the attainable floor back down.
ExtendedShootResult shoot_extended(const VectorXl& a,
                                   const OrderedSample& sample,
                                   const PenaltyConfig& config,
                                   bool want_jacobian);

/// Residual of the first-order optimality identity for the test function
/// delta(z) = z^power: the knot sum (1/n) sum delta(y_j)(1 - r_j^2 e^{2 theta})
/// minus (-1)^(m-1) lambda times the exact integral of theta^(2m-1) delta'.
double first_order_residual(const OrderedSample& sample,
                            const ThetaSpline& spline, double lambda,
                            int power);

}  // namespace diffest
