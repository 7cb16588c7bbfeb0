#pragma once

#include "ressm/core/linalg.hpp"

#include <vector>

namespace ressm::diag {

struct ParameterSummary {
  double mean = 0.0;
  double sd = 0.0;
  double normal_lo = 0.0;  // mean -/+ z sd
  double normal_hi = 0.0;
  double quantile_lo = 0.0;  // empirical quantiles, type 7
  double quantile_hi = 0.0;
  double ess = 0.0;
  std::vector<double> acf;  // lags 1..max_lag
};

enum class Interval { kNormal, kQuantile };

/// Sample autocorrelations at lags 1..max_lag (biased autocovariance,
/// divisor n). A constant chain has all-zero autocorrelations.
std::vector<double> autocorrelation(const Vector& chain, int max_lag);

/// n / (1 + 2 sum rho_t) with Geyer's initial positive sequence: lags are
/// summed in pairs until the first non-positive pair. Capped at n; a
/// constant chain returns n.
double effective_sample_size(const Vector& chain);

/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::vector<double> values, double p);

/// Mean, sd (n - 1 divisor), both interval styles at `level`, ESS and ACF.
ParameterSummary summarize(const Vector& chain, double level = 0.95,
                           int max_lag = 10);
/// summarize() per column of a draws matrix (rows = draws).
std::vector<ParameterSummary> summarize_columns(const Matrix& draws,
                                                double level = 0.95,
                                                int max_lag = 10);

struct ContrastResult {
  std::vector<ParameterSummary> entries;
  std::vector<bool> flagged;  // interval excludes zero
  double level = 0.95;        // after any Bonferroni adjustment
};

/// Summary of sum_r w_r X_r per kept draw, where `draws` holds R blocks of
/// `block` columns. With `bonferroni`, each interval uses level
/// 1 - (1 - level) / block.
ContrastResult group_contrast(const Matrix& draws, Index block,
                              const std::vector<double>& weights,
                              Interval style = Interval::kQuantile,
                              bool bonferroni = false, double level = 0.95);

}  // namespace ressm::diag
