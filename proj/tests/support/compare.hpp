#pragma once

// Bitwise comparison of chain outputs.

#include "ressm/gibbs/chain.hpp"

#include <cstring>
#include <string>
#include <vector>

namespace oracle {

inline bool same_bits(const ressm::Matrix& a, const ressm::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

inline bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

inline bool same_bits(const std::vector<ressm::Matrix>& a, const std::vector<ressm::Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

/// Empty when the outputs agree bit for bit; otherwise the first field that
/// differs.
inline std::string first_difference(const ressm::gibbs::ChainOutput& a,
                                    const ressm::gibbs::ChainOutput& b) {
  const auto& da = a.draws;
  const auto& db = b.draws;
  if (da.iterations != db.iterations) return "draws.iterations";
  const int rows = da.rows();
  auto top = [rows](const ressm::Matrix& m) -> ressm::Matrix { return m.topRows(rows); };
  const std::vector<std::pair<const char*, std::pair<const ressm::Matrix*, const ressm::Matrix*>>>
      draw_fields = {{"a_pop", {&da.a_pop, &db.a_pop}},
                     {"a_grp", {&da.a_grp, &db.a_grp}},
                     {"a_sub", {&da.a_sub, &db.a_sub}},
                     {"theta_pop", {&da.theta_pop, &db.theta_pop}},
                     {"theta_grp", {&da.theta_grp, &db.theta_grp}},
                     {"theta_sub", {&da.theta_sub, &db.theta_sub}},
                     {"cov_diag", {&da.cov_diag, &db.cov_diag}},
                     {"sigma2", {&da.sigma2, &db.sigma2}}};
  for (const auto& [name, pair] : draw_fields) {
    if (!same_bits(top(*pair.first), top(*pair.second))) return std::string("draws.") + name;
  }
  if (!same_bits(a.trace.complete, b.trace.complete)) return "trace.complete";
  if (!same_bits(a.trace.plugin, b.trace.plugin)) return "trace.plugin";
  if (!same_bits(a.trace.conditional, b.trace.conditional)) return "trace.conditional";
  if (a.sums.count != b.sums.count) return "sums.count";
  if (a.sums.count > 0 && !ressm::model::identical(a.sums.state, b.sums.state)) return "sums.state";
  if (!same_bits(a.sums.cov_v, b.sums.cov_v) || !same_bits(a.sums.cov_gamma, b.sums.cov_gamma) ||
      !same_bits(a.sums.cov_u, b.sums.cov_u) || !same_bits(a.sums.cov_psi, b.sums.cov_psi) ||
      !same_bits(a.sums.cov_a, b.sums.cov_a) || !same_bits(a.sums.cov_theta, b.sums.cov_theta)) {
    return "sums.cov";
  }
  if (!same_bits(a.sums.fitted, b.sums.fitted)) return "sums.fitted";
  if (a.audit.records.size() != b.audit.records.size()) return "audit.size";
  for (std::size_t i = 0; i < a.audit.records.size(); ++i) {
    const auto& x = a.audit.records[i];
    const auto& y = b.audit.records[i];
    if (x.iteration != y.iteration || x.level != y.level || x.r != y.r || x.i != y.i ||
        x.j != y.j || x.q != y.q || x.flipped != y.flipped ||
        std::memcmp(&x.cosine, &y.cosine, sizeof(double)) != 0) {
      return "audit.records";
    }
  }
  if (!same_bits(a.stage1.theta0_mean, b.stage1.theta0_mean)) return "stage1.theta0_mean";
  if (!same_bits(a.stage1.loglik, b.stage1.loglik)) return "stage1.loglik";
  if (!ressm::model::identical(a.state, b.state)) return "state";
  if (a.iterations_done != b.iterations_done) return "iterations_done";
  if (a.has_conditional_at_mean != b.has_conditional_at_mean ||
      std::memcmp(&a.conditional_at_mean, &b.conditional_at_mean, sizeof(double)) != 0) {
    return "conditional_at_mean";
  }
  return {};
}

}  // namespace oracle
