#include "ressm/diag/summary.hpp"

#include "ressm/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ressm::diag {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Inverse standard normal CDF by Newton iteration from a bracketed start.
double normal_quantile(double p) {
  double x = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double step = (normal_cdf(x) - p) / density;
    x -= std::clamp(step, -1.0, 1.0);
    if (std::abs(step) < 1e-14) break;
  }
  return x;
}

std::vector<double> autocovariance(const Vector& chain, int max_lag) {
  const Index n = chain.size();
  const Vector centered = chain.array() - chain.mean();
  std::vector<double> out;
  for (int lag = 0; lag <= max_lag && lag < n; ++lag) {
    out.push_back(centered.head(n - lag).dot(centered.tail(n - lag)) /
                  static_cast<double>(n));
  }
  return out;
}

}  // namespace

std::vector<double> autocorrelation(const Vector& chain, int max_lag) {
  const auto gamma = autocovariance(chain, max_lag);
  std::vector<double> out(static_cast<std::size_t>(max_lag), 0.0);
  if (gamma.empty() || !(gamma[0] > 0.0)) return out;
  for (std::size_t lag = 1; lag < gamma.size(); ++lag) out[lag - 1] = gamma[lag] / gamma[0];
  return out;
}

double effective_sample_size(const Vector& chain) {
  const Index n = chain.size();
  if (n < 2) return static_cast<double>(n);
  const auto gamma = autocovariance(chain, static_cast<int>(n - 1));
  if (!(gamma[0] > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < gamma.size(); ++k) {
    const double pair = (gamma[2 * k] + gamma[2 * k + 1]) / gamma[0];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) / std::max(tau, 1e-12);
  return std::min(ess, static_cast<double>(n));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ParameterSummary summarize(const Vector& chain, double level, int max_lag) {
  if (chain.size() < 1) throw ValidationError("summarize: empty chain");
  ParameterSummary s;
  const Index n = chain.size();
  s.mean = chain.mean();
  s.sd = n > 1 ? std::sqrt((chain.array() - s.mean).square().sum() /
                           static_cast<double>(n - 1))
               : 0.0;
  const double alpha = 1.0 - level;
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  s.normal_lo = s.mean - z * s.sd;
  s.normal_hi = s.mean + z * s.sd;
  std::vector<double> values(chain.data(), chain.data() + n);
  s.quantile_lo = quantile(values, 0.5 * alpha);
  s.quantile_hi = quantile(std::move(values), 1.0 - 0.5 * alpha);
  s.ess = effective_sample_size(chain);
  s.acf = autocorrelation(chain, max_lag);
  return s;
}

std::vector<ParameterSummary> summarize_columns(const Matrix& draws,
                                                double level, int max_lag) {
  std::vector<ParameterSummary> out;
  out.reserve(static_cast<std::size_t>(draws.cols()));
  for (Index c = 0; c < draws.cols(); ++c) {
    out.push_back(summarize(draws.col(c), level, max_lag));
  }
  return out;
}

ContrastResult group_contrast(const Matrix& draws, Index block,
                              const std::vector<double>& weights,
                              Interval style, bool bonferroni, double level) {
  if (block <= 0 ||
      draws.cols() != block * static_cast<Index>(weights.size())) {
    throw ValidationError("group_contrast: " + std::to_string(weights.size()) +
                          " weights do not match " +
                          std::to_string(draws.cols()) + " columns in blocks of " +
                          std::to_string(block));
  }
  Matrix contrast = Matrix::Zero(draws.rows(), block);
  for (std::size_t r = 0; r < weights.size(); ++r) {
    contrast += weights[r] * draws.middleCols(static_cast<Index>(r) * block, block);
  }
  ContrastResult out;
  out.level = bonferroni ? 1.0 - (1.0 - level) / static_cast<double>(block) : level;
  out.entries = summarize_columns(contrast, out.level);
  for (const auto& e : out.entries) {
    const double lo = style == Interval::kNormal ? e.normal_lo : e.quantile_lo;
    const double hi = style == Interval::kNormal ? e.normal_hi : e.quantile_hi;
    out.flagged.push_back(lo > 0.0 || hi < 0.0);
  }
  return out;
}

}  // namespace ressm::diag
