#include "ressm/model/spec.hpp"

#include "ressm/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ressm::model {

std::string to_string(FitMode mode) {
  switch (mode) {
    case FitMode::kFull: return "full";
    case FitMode::kFixedLoading: return "fixed-loading";
    case FitMode::kFixedAll: return "fixed-all";
  }
  return "full";
}

FitMode fit_mode_from_string(const std::string& name) {
  if (name == "full") return FitMode::kFull;
  if (name == "fixed-loading") return FitMode::kFixedLoading;
  if (name == "fixed-all") return FitMode::kFixedAll;
  throw ValidationError("unknown model mode '" + name +
                        "' (expected full, fixed-loading or fixed-all)");
}

Hyperparams default_hyperparams(Index P, Index Q, Index m, double small_kappa) {
  const double la = static_cast<double>(m * Q * Q);
  const double lt = static_cast<double>(stats::low_length(P, Q));
  Hyperparams h;
  h.nu_v = h.nu_gamma = la;
  h.nu_u = h.nu_psi = lt;
  h.nu_a = la + 3;
  h.nu_theta = lt + 3;
  h.kappa_u = h.kappa_v = h.kappa_psi = h.kappa_gamma = small_kappa;
  h.kappa_a = h.kappa_theta = 100;
  return h;
}

MCMCSchedule default_schedule(double scale) {
  MCMCSchedule s;
  s.n_iter = std::max(1, static_cast<int>(std::lround(7500 * scale)));
  s.n_burnin = std::min(s.n_iter - 1,
                        static_cast<int>(std::lround(2500 * scale)));
  s.thin = std::max(1, static_cast<int>(std::lround(10 * scale)));
  s.n_init_iter = s.n_burnin;
  s.sign_check_start = s.n_burnin / 2;
  s.sign_check_end = s.n_burnin;
  return s;
}

std::vector<std::string> validate(const HierDataset& ds, const ModelSpec& spec) {
  std::vector<std::string> out;
  const auto& layout = ds.layout;
  if (layout.groups() < 1) out.push_back("dataset has no groups");
  if (spec.Q < 1) out.push_back("latent dimension must be >= 1");
  if (spec.m < 1) out.push_back("MVAR order must be >= 1");
  if (spec.Q >= ds.P) out.push_back("latent dimension must be < channels");
  if (ds.K <= spec.m) out.push_back("timepoints K must exceed MVAR order m");
  if (static_cast<int>(ds.Y.size()) != layout.total_segments()) {
    out.push_back("dataset holds " + std::to_string(ds.Y.size()) +
                  " segments but the layout expects " +
                  std::to_string(layout.total_segments()));
    return out;
  }
  for (int s = 0; s < layout.total_segments(); ++s) {
    const auto& ref = layout.segment(s);
    const Matrix& y = ds.Y[s];
    const std::string where = "(" + std::to_string(ref.r) + "," +
                              std::to_string(ref.i) + "," +
                              std::to_string(ref.j) + ")";
    if (y.rows() != ds.P || y.cols() != ds.K) {
      out.push_back("segment " + where + " has shape " +
                    std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                    ", expected " + std::to_string(ds.P) + "x" +
                    std::to_string(ds.K));
      continue;
    }
    if (y.allFinite()) continue;
    for (Index k = 0; k < y.cols(); ++k) {
      for (Index p = 0; p < y.rows(); ++p) {
        if (!std::isfinite(y(p, k))) {
          out.push_back("non-finite value at (r,i,j,k,p) = (" +
                        std::to_string(ref.r) + "," + std::to_string(ref.i) +
                        "," + std::to_string(ref.j) + "," + std::to_string(k) +
                        "," + std::to_string(p) + ")");
        }
      }
    }
  }
  return out;
}

std::vector<std::string> validate(const Hyperparams& h, Index P,
                                  const ModelSpec& spec) {
  std::vector<std::string> out;
  const double la = static_cast<double>(spec.la());
  const double lt = static_cast<double>(spec.ltheta(P));
  auto at_least = [&](double value, double bound, const char* name) {
    if (!(value >= bound)) {
      std::ostringstream msg;
      msg << name << " = " << value << " must be >= " << bound;
      out.push_back(msg.str());
    }
  };
  at_least(h.nu_v, la, "nu_v");
  at_least(h.nu_gamma, la, "nu_gamma");
  at_least(h.nu_u, lt, "nu_u");
  at_least(h.nu_psi, lt, "nu_psi");
  at_least(h.nu_a, la + 3, "nu_a");
  at_least(h.nu_theta, lt + 3, "nu_theta");
  const std::pair<double, const char*> positives[] = {
      {h.kappa_u, "kappa_u"},         {h.kappa_v, "kappa_v"},
      {h.kappa_psi, "kappa_psi"},     {h.kappa_gamma, "kappa_gamma"},
      {h.kappa_a, "kappa_a"},         {h.kappa_theta, "kappa_theta"},
      {h.a0, "a0"},                   {h.b0, "b0"}};
  for (const auto& [value, name] : positives) {
    if (!(value > 0.0)) out.push_back(std::string(name) + " must be positive");
  }
  if (h.population_precision < 0.0) {
    out.push_back("population_precision must be >= 0");
  }
  if (h.initial_state_precision < 0.0) {
    out.push_back("initial_state_precision must be >= 0");
  }
  return out;
}

std::vector<std::string> validate(const MCMCSchedule& s) {
  std::vector<std::string> out;
  if (s.n_iter < 1) out.push_back("n_iter must be >= 1");
  if (s.n_burnin < 0 || s.n_burnin >= s.n_iter) {
    out.push_back("n_burnin must lie in [0, n_iter)");
  }
  if (s.thin < 1) out.push_back("thin must be >= 1");
  if (s.n_init_iter < 0) out.push_back("n_init_iter must be >= 0");
  if (s.sign_check_every < 1) out.push_back("sign_check_every must be >= 1");
  if (s.sign_tracking &&
      (s.sign_check_start < 0 || s.sign_check_end > s.n_burnin ||
       s.sign_check_start > s.sign_check_end)) {
    out.push_back("sign window must lie inside the burn-in window");
  }
  if (s.rho0 > 0.0) out.push_back("rho0 must be <= 0");
  return out;
}

void throw_if_invalid(const std::vector<std::string>& violations,
                      const std::string& what) {
  if (violations.empty()) return;
  std::string msg = what + ":";
  for (const auto& v : violations) msg += "\n  " + v;
  throw ValidationError(msg);
}

}  // namespace ressm::model
