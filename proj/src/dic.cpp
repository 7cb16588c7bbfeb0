#include "ressm/diag/dic.hpp"

#include "ressm/core/error.hpp"

#include <numeric>

namespace ressm::diag {
namespace {

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

double compute_cdic(const std::vector<double>& complete,
                    const std::vector<double>& plugin) {
  if (complete.empty() || plugin.empty()) {
    throw ValidationError("compute_cdic: no kept draws");
  }
  if (complete.size() != plugin.size()) {
    throw ValidationError("compute_cdic: trace lengths differ");
  }
  return -4.0 * mean(complete) + 2.0 * mean(plugin);
}

DicVariants compute_dic_variants(const std::vector<double>& conditional,
                                 double loglik_at_mean) {
  if (conditional.size() < 2) {
    throw ValidationError("compute_dic_variants: need at least two draws for p_V");
  }
  const double mu = mean(conditional);
  double ss = 0.0;
  for (const double v : conditional) ss += (v - mu) * (v - mu);
  const double var = ss / static_cast<double>(conditional.size() - 1);

  DicVariants out{};
  out.deviance_at_mean = -2.0 * loglik_at_mean;
  out.p_d = -2.0 * mu - out.deviance_at_mean;
  out.p_v = 2.0 * var;
  out.dic1 = out.deviance_at_mean + 2.0 * out.p_d;
  out.dic2 = out.deviance_at_mean + 3.0 * out.p_d;
  out.dic3 = out.deviance_at_mean + 2.0 * out.p_v;
  return out;
}

}  // namespace ressm::diag
