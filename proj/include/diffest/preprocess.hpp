#pragma once

#include <cstdint>

#include "diffest/types.hpp"

namespace diffest {

/// Scaled returns from raw observations: r = dY / sqrt(dt).
ReturnSeries compute_returns(const RawSeries& series);

/// Perturb every value by a centered Gaussian whose variance is
/// relative_noise_variance times the mean squared tentative return, so that
/// level ties are broken almost surely. Deterministic in the seed.
RawSeries break_ties(const RawSeries& series, double relative_noise_variance,
                     std::uint64_t seed);

/// Rank-sort the (level, return) pairs by level. Levels must be distinct.
OrderedSample order_sample(const ReturnSeries& returns);

struct VarianceRatioResult {
  double statistic;  // (max std / min std)^2
  bool reject_at_10pct;
  bool reject_at_5pct;
  double p_value;  // upper-tail, larger variance in the numerator
};

/// F-test of equality of variances from summary statistics.
VarianceRatioResult variance_ratio_test(double std_a, long n_a, double std_b,
                                        long n_b);

}  // namespace diffest
