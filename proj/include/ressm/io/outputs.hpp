#pragma once

#include "ressm/bench/bench.hpp"
#include "ressm/diag/connectivity.hpp"
#include "ressm/diag/dic.hpp"
#include "ressm/gibbs/chain.hpp"
#include "ressm/model/layout.hpp"
#include "ressm/model/spec.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ressm::io {

/// Name of one column of a KeptDraws matrix.
struct ColumnLabel {
  std::string parameter;  // "A", "Theta", "Sigma_v", "sigma2", ...
  std::string level;      // "population", "group", "subject", "segment"
  std::string unit;       // "", "r0", "r0.i3", "r0.i3.j1"
  std::string index;      // "h1[0,1]", "[3,2]", "[5]"
};

/// One label list per KeptDraws matrix, in the matrix's column order.
struct DrawLabels {
  std::vector<ColumnLabel> a_pop, a_grp, a_sub, theta_pop, theta_grp,
      theta_sub, cov_diag, sigma2;
};
DrawLabels draw_labels(const model::HierLayout& layout,
                       const model::ModelSpec& spec, Index P);

/// Posterior summaries of every stored draw column, tab-separated.
void write_summaries(const std::filesystem::path& path,
                     const gibbs::ChainOutput& out,
                     const model::HierLayout& layout,
                     const model::ModelSpec& spec, Index P, double level);

/// Plot-ready long table: parameter, level, unit, index, iteration, value.
void write_draws_long(const std::filesystem::path& path,
                      const gibbs::ChainOutput& out,
                      const model::HierLayout& layout,
                      const model::ModelSpec& spec, Index P);

/// Every KeptDraws matrix as a tensor file under `dir`.
void write_draw_tensors(const std::filesystem::path& dir,
                        const gibbs::KeptDraws& draws);

void write_sign_audit(const std::filesystem::path& path,
                      const ident::SignAudit& audit);
void write_trace(const std::filesystem::path& path,
                 const gibbs::LoglikTrace& trace,
                 const std::vector<int>& iterations);

struct DicRow {
  std::string label;
  double cdic = 0.0;
  diag::DicVariants variants;
};
void write_dic_table(const std::filesystem::path& path,
                     const std::vector<DicRow>& rows);

/// B matrices as tensors (level/unit/lag) and a thresholded edge list.
void write_connectivity(const std::filesystem::path& dir,
                        const diag::ConnectivitySet& set,
                        const model::HierLayout& layout, double threshold);

/// Group-level connectivity entries whose quantile interval excludes zero.
void write_connectivity_significance(const std::filesystem::path& path,
                                     const gibbs::KeptDraws& draws,
                                     const model::HierLayout& layout,
                                     const model::ModelSpec& spec, Index P,
                                     double level);

/// JSON with tool version, seed, config hash and free-form extras.
void write_run_metadata(const std::filesystem::path& path,
                        const std::string& mode, std::uint64_t seed,
                        const std::string& config_hash,
                        const std::string& extra_json = "{}");

/// Machine-readable reports of the bench studies.
std::string coverage_report_json(const bench::CoverageReport& report);
std::string sign_report_json(const bench::SignReport& report);
std::string dic_report_json(const bench::DicReport& report);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ressm::io
