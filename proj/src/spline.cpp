#include "diffest/spline.hpp"

#include <algorithm>
#include <cmath>

namespace diffest {

namespace {

// Taylor evaluation of the derivative stack at a knot, differentiated
// `order` times, at offset h; only orders `lo..hi` of the stack contribute.
double taylor_eval(const ThetaSpline& spline, Eigen::Index knot, double h,
                   int order, int hi) {
  if (order > hi) return 0.0;
  double acc = spline.deriv(knot, hi);
  for (int l = hi - 1; l >= order; --l) {
    acc = spline.deriv(knot, l) + acc * h / static_cast<double>(l - order + 1);
  }
  return acc;
}

}  // namespace

double eval_theta(const ThetaSpline& spline, double x, int order) {
  const int m = spline.order();
  const int top = 2 * m - 1;
  if (order < 0 || order > top) {
    throw std::invalid_argument("eval_theta: order out of range");
  }
  const VectorXd& knots = spline.knots();
  const Eigen::Index n = spline.n();

  if (x < knots(0)) {
    // Natural tail: degree-(m-1) extension of orders 0..m-1 at the first knot.
    return taylor_eval(spline, 0, x - knots(0), order, m - 1);
  }
  if (x > knots(n - 1)) {
    return taylor_eval(spline, n - 1, x - knots(n - 1), order, m - 1);
  }
  // Locate the interval [y_k, y_{k+1}) containing x; x == y_n uses the
  // stored values at the last knot.
  const double* begin = knots.data();
  const double* pos = std::upper_bound(begin, begin + n, x);
  Eigen::Index k = (pos - begin) - 1;
  if (k == n - 1) return spline.deriv(n - 1, order);
  return taylor_eval(spline, k, x - knots(k), order, top);
}

double eval_sigma(const ThetaSpline& spline, double x) {
  double neg_theta = -eval_theta(spline, x, 0);
  neg_theta = std::clamp(neg_theta, -700.0, 700.0);
  return std::exp(neg_theta);
}

std::vector<GridPoint> sigma_grid(const ThetaSpline& spline, int points) {
  return sigma_grid(spline, points, spline.knots()(0),
                    spline.knots()(spline.n() - 1));
}

std::vector<GridPoint> sigma_grid(const ThetaSpline& spline, int points,
                                  double lo, double hi) {
  if (points < 2) {
    throw std::invalid_argument("sigma_grid: need at least 2 points");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("sigma_grid: lo must be below hi");
  }
  const double y1 = spline.knots()(0);
  const double yn = spline.knots()(spline.n() - 1);
  std::vector<GridPoint> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double frac = static_cast<double>(i) / (points - 1);
    const double x = (i == points - 1) ? hi : lo + frac * (hi - lo);
    grid.push_back({x, eval_sigma(spline, x), x < y1 || x > yn});
  }
  return grid;
}

}  // namespace diffest
