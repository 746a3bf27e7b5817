#include "diffest/preprocess.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace diffest {

ReturnSeries compute_returns(const RawSeries& series) {
  const Eigen::Index n = series.size() - 1;
  ReturnSeries out;
  out.levels.resize(n);
  out.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dt = series.times()(i + 1) - series.times()(i);
    const double r = (series.values()(i + 1) - series.values()(i)) /
                     std::sqrt(dt);
    if (!std::isfinite(r)) {
      throw std::runtime_error("compute_returns: non-finite return at index " +
                               std::to_string(i));
    }
    out.levels(i) = series.values()(i);
    out.returns(i) = r;
  }
  return out;
}

RawSeries break_ties(const RawSeries& series, double relative_noise_variance,
                     std::uint64_t seed) {
  if (relative_noise_variance < 0.0) {
    throw std::invalid_argument("break_ties: noise variance must be >= 0");
  }
  if (relative_noise_variance == 0.0) return series;

  const ReturnSeries tentative = compute_returns(series);
  const double mean_r2 = tentative.returns.squaredNorm() /
                         static_cast<double>(tentative.n());
  const double sd = std::sqrt(relative_noise_variance * mean_r2);
  if (sd == 0.0) return series;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  VectorXd perturbed = series.values();
  for (Eigen::Index i = 0; i < perturbed.size(); ++i) {
    perturbed(i) += noise(rng);
  }
  return RawSeries(series.times(), std::move(perturbed), series.label());
}

OrderedSample order_sample(const ReturnSeries& returns) {
  const Eigen::Index n = returns.n();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return returns.levels(a) < returns.levels(b);
  });
  VectorXd y(n), r(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    y(j) = returns.levels(idx[static_cast<std::size_t>(j)]);
    r(j) = returns.returns(idx[static_cast<std::size_t>(j)]);
    if (j > 0 && y(j) == y(j - 1)) {
      throw std::runtime_error(
          "order_sample: duplicate level " + std::to_string(y(j)) +
          "; apply break_ties first");
    }
  }
  return OrderedSample(std::move(y), std::move(r));
}

VarianceRatioResult variance_ratio_test(double std_a, long n_a, double std_b,
                                        long n_b) {
  if (std_a <= 0.0 || std_b <= 0.0) {
    throw std::invalid_argument("variance_ratio_test: stds must be positive");
  }
  if (n_a < 2 || n_b < 2) {
    throw std::invalid_argument("variance_ratio_test: counts must be >= 2");
  }
  // Larger variance in the numerator; upper-tail rejection region.
  double s_num = std_a, s_den = std_b;
  long df_num = n_a - 1, df_den = n_b - 1;
  if (std_b > std_a) {
    std::swap(s_num, s_den);
    std::swap(df_num, df_den);
  }
  const double stat = (s_num / s_den) * (s_num / s_den);
  boost::math::fisher_f dist(static_cast<double>(df_num),
                             static_cast<double>(df_den));
  const double p = boost::math::cdf(boost::math::complement(dist, stat));
  return VarianceRatioResult{stat, p < 0.10, p < 0.05, p};
}

}  // namespace diffest
