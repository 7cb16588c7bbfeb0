#include "ressm/io/outputs.hpp"

#include "ressm/diag/summary.hpp"
#include "ressm/io/tensor_file.hpp"

#include <json.hpp>

#include <chrono>
#include <iomanip>
#include <sstream>

namespace ressm::io {
namespace {

using nlohmann::json;

std::string group_unit(int r) { return "r" + std::to_string(r); }

std::string subject_unit(const model::HierLayout& layout, int u) {
  const auto& s = layout.subject(u);
  return "r" + std::to_string(s.r) + ".i" + std::to_string(s.i);
}

std::string segment_unit(const model::HierLayout& layout, int s) {
  const auto& g = layout.segment(s);
  return "r" + std::to_string(g.r) + ".i" + std::to_string(g.i) + ".j" +
         std::to_string(g.j);
}

std::vector<std::string> dynamics_indices(Index Q, Index m) {
  std::vector<std::string> out;
  for (Index e = 0; e < m * Q * Q; ++e) {
    const Index row = e % Q;
    const Index col = e / Q;
    out.push_back("h" + std::to_string(col / Q + 1) + "[" + std::to_string(row) + "," +
                  std::to_string(col % Q) + "]");
  }
  return out;
}

std::vector<std::string> loading_indices(Index P, Index Q) {
  const stats::IndexMapF map(P, Q);
  std::vector<std::string> out;
  for (const Index v : map.indices()) {
    out.push_back("[" + std::to_string(v % P) + "," + std::to_string(v / P) + "]");
  }
  return out;
}

void append(std::vector<ColumnLabel>& out, const std::string& parameter,
            const std::string& level, const std::string& unit,
            const std::vector<std::string>& indices) {
  for (const auto& idx : indices) out.push_back({parameter, level, unit, idx});
}

std::vector<std::string> diagonal_indices(Index n) {
  std::vector<std::string> out;
  for (Index k = 0; k < n; ++k) out.push_back("[" + std::to_string(k) + "]");
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

json rate_json(const bench::Rate& r) {
  return {{"hits", r.hits}, {"total", r.total}, {"rate", r.value()}};
}

json failures_json(const std::vector<bench::ReplicateFailure>& f) {
  json out = json::array();
  for (const auto& x : f) out.push_back({{"replicate", x.replicate}, {"error", x.what}});
  return out;
}

}  // namespace

DrawLabels draw_labels(const model::HierLayout& layout, const model::ModelSpec& spec,
                       Index P) {
  const auto a_idx = dynamics_indices(spec.Q, spec.m);
  const auto t_idx = loading_indices(P, spec.Q);
  DrawLabels l;
  append(l.a_pop, "A", "population", "", a_idx);
  append(l.theta_pop, "Theta", "population", "", t_idx);
  for (int r = 0; r < layout.groups(); ++r) {
    append(l.a_grp, "A", "group", group_unit(r), a_idx);
    append(l.theta_grp, "Theta", "group", group_unit(r), t_idx);
  }
  for (int u = 0; u < layout.total_subjects(); ++u) {
    append(l.a_sub, "A", "subject", subject_unit(layout, u), a_idx);
    append(l.theta_sub, "Theta", "subject", subject_unit(layout, u), t_idx);
  }
  const auto la = diagonal_indices(spec.la());
  const auto lt = diagonal_indices(spec.ltheta(P));
  for (int r = 0; r < layout.groups(); ++r) append(l.cov_diag, "Sigma_v", "group", group_unit(r), la);
  for (int r = 0; r < layout.groups(); ++r) append(l.cov_diag, "Sigma_gamma", "group", group_unit(r), la);
  append(l.cov_diag, "Sigma_a", "population", "", la);
  for (int r = 0; r < layout.groups(); ++r) append(l.cov_diag, "Sigma_u", "group", group_unit(r), lt);
  for (int r = 0; r < layout.groups(); ++r) append(l.cov_diag, "Sigma_psi", "group", group_unit(r), lt);
  append(l.cov_diag, "Sigma_theta", "population", "", lt);
  for (int s = 0; s < layout.total_segments(); ++s) {
    l.sigma2.push_back({"sigma2", "segment", segment_unit(layout, s), ""});
  }
  return l;
}

void write_summaries(const std::filesystem::path& path, const gibbs::ChainOutput& out,
                     const model::HierLayout& layout, const model::ModelSpec& spec,
                     Index P, double level) {
  const auto labels = draw_labels(layout, spec, P);
  const auto& d = out.draws;
  std::ostringstream ss;
  ss << "parameter\tlevel\tunit\tindex\tmean\tsd\tnormal_lo\tnormal_hi\tquantile_lo"
        "\tquantile_hi\tess\tacf1\n";
  const std::pair<const std::vector<ColumnLabel>*, const Matrix*> blocks[] = {
      {&labels.a_pop, &d.a_pop},         {&labels.a_grp, &d.a_grp},
      {&labels.a_sub, &d.a_sub},         {&labels.theta_pop, &d.theta_pop},
      {&labels.theta_grp, &d.theta_grp}, {&labels.theta_sub, &d.theta_sub},
      {&labels.cov_diag, &d.cov_diag},   {&labels.sigma2, &d.sigma2}};
  for (const auto& [lab, m] : blocks) {
    const Matrix draws = m->topRows(d.rows());
    for (Index c = 0; c < draws.cols() && c < static_cast<Index>(lab->size()); ++c) {
      const auto s = diag::summarize(draws.col(c), level, 1);
      const auto& l = (*lab)[static_cast<std::size_t>(c)];
      ss << l.parameter << '\t' << l.level << '\t' << l.unit << '\t' << l.index << '\t'
         << fmt(s.mean) << '\t' << fmt(s.sd) << '\t' << fmt(s.normal_lo) << '\t'
         << fmt(s.normal_hi) << '\t' << fmt(s.quantile_lo) << '\t' << fmt(s.quantile_hi)
         << '\t' << fmt(s.ess) << '\t' << fmt(s.acf.empty() ? 0.0 : s.acf[0]) << '\n';
    }
  }
  write_file_atomic(path, ss.str());
}

void write_draws_long(const std::filesystem::path& path, const gibbs::ChainOutput& out,
                      const model::HierLayout& layout, const model::ModelSpec& spec,
                      Index P) {
  const auto labels = draw_labels(layout, spec, P);
  const auto& d = out.draws;
  std::ostringstream ss;
  ss << "parameter\tlevel\tunit\tindex\titeration\tvalue\n";
  const std::pair<const std::vector<ColumnLabel>*, const Matrix*> blocks[] = {
      {&labels.a_pop, &d.a_pop},         {&labels.a_grp, &d.a_grp},
      {&labels.theta_pop, &d.theta_pop}, {&labels.theta_grp, &d.theta_grp},
      {&labels.cov_diag, &d.cov_diag},   {&labels.sigma2, &d.sigma2}};
  for (const auto& [lab, m] : blocks) {
    for (Index c = 0; c < m->cols() && c < static_cast<Index>(lab->size()); ++c) {
      const auto& l = (*lab)[static_cast<std::size_t>(c)];
      for (int row = 0; row < d.rows(); ++row) {
        ss << l.parameter << '\t' << l.level << '\t' << l.unit << '\t' << l.index << '\t'
           << d.iterations[row] << '\t' << fmt((*m)(row, c)) << '\n';
      }
    }
  }
  write_file_atomic(path, ss.str());
}

void write_draw_tensors(const std::filesystem::path& dir, const gibbs::KeptDraws& d) {
  const std::pair<const char*, const Matrix*> blocks[] = {
      {"a_pop", &d.a_pop},         {"a_grp", &d.a_grp},         {"a_sub", &d.a_sub},
      {"theta_pop", &d.theta_pop}, {"theta_grp", &d.theta_grp}, {"theta_sub", &d.theta_sub},
      {"cov_diag", &d.cov_diag},   {"sigma2", &d.sigma2}};
  for (const auto& [name, m] : blocks) {
    write_matrix(dir / (std::string(name) + ".rssm"), m->topRows(d.rows()));
  }
}

void write_sign_audit(const std::filesystem::path& path, const ident::SignAudit& audit) {
  std::ostringstream ss;
  ss << "iteration\tlevel\tr\ti\tj\tq\tcosine\tflipped\n";
  for (const auto& r : audit.records) {
    ss << r.iteration << '\t' << ident::to_string(r.level) << '\t' << r.r << '\t' << r.i
       << '\t' << r.j << '\t' << r.q << '\t' << fmt(r.cosine) << '\t'
       << (r.flipped ? 1 : 0) << '\n';
  }
  write_file_atomic(path, ss.str());
}

void write_trace(const std::filesystem::path& path, const gibbs::LoglikTrace& trace,
                 const std::vector<int>& iterations) {
  std::ostringstream ss;
  ss << "iteration\tcomplete\tplugin\tconditional\n";
  for (std::size_t k = 0; k < trace.complete.size(); ++k) {
    ss << (k < iterations.size() ? iterations[k] : 0) << '\t' << fmt(trace.complete[k])
       << '\t' << (k < trace.plugin.size() ? fmt(trace.plugin[k]) : "NA") << '\t'
       << (k < trace.conditional.size() ? fmt(trace.conditional[k]) : "NA") << '\n';
  }
  write_file_atomic(path, ss.str());
}

void write_dic_table(const std::filesystem::path& path, const std::vector<DicRow>& rows) {
  std::ostringstream ss;
  ss << "model\tcDIC\tDIC1\tDIC2\tDIC3\tp_D\tp_V\tdeviance_at_mean\n";
  for (const auto& r : rows) {
    const auto& v = r.variants;
    ss << r.label << '\t' << fmt(r.cdic) << '\t' << fmt(v.dic1) << '\t' << fmt(v.dic2)
       << '\t' << fmt(v.dic3) << '\t' << fmt(v.p_d) << '\t' << fmt(v.p_v) << '\t'
       << fmt(v.deviance_at_mean) << '\n';
  }
  write_file_atomic(path, ss.str());
}

void write_connectivity(const std::filesystem::path& dir, const diag::ConnectivitySet& set,
                        const model::HierLayout& layout, double threshold) {
  std::ostringstream edges;
  edges << "level\tunit\tlag\tfrom\tto\tweight\n";
  auto emit = [&](const std::string& level, const std::string& unit,
                  const std::vector<Matrix>& lags) {
    for (std::size_t h = 0; h < lags.size(); ++h) {
      const int lag = static_cast<int>(h) + 1;
      write_matrix(dir / level / (unit + "_h" + std::to_string(lag) + ".rssm"), lags[h]);
      for (const auto& e : diag::edge_list(lags[h], lag, threshold)) {
        edges << level << '\t' << unit << '\t' << e.lag << '\t' << e.from << '\t' << e.to
              << '\t' << fmt(e.weight) << '\n';
      }
    }
  };
  for (std::size_t r = 0; r < set.group.size(); ++r) {
    emit("group", group_unit(static_cast<int>(r)), set.group[r]);
  }
  for (std::size_t u = 0; u < set.subject.size(); ++u) {
    emit("subject", subject_unit(layout, static_cast<int>(u)), set.subject[u]);
  }
  for (std::size_t s = 0; s < set.segment.size(); ++s) {
    emit("segment", segment_unit(layout, static_cast<int>(s)), set.segment[s]);
  }
  write_file_atomic(dir / "edges.tsv", edges.str());
}

void write_connectivity_significance(const std::filesystem::path& path,
                                     const gibbs::KeptDraws& d,
                                     const model::HierLayout& layout,
                                     const model::ModelSpec& spec, Index P,
                                     double level) {
  std::ostringstream ss;
  ss << "group\tlag\tfrom\tto\tmean\tquantile_lo\tquantile_hi\tsignificant\n";
  const Index la = spec.la();
  const Index lt = spec.ltheta(P);
  for (int r = 0; r < layout.groups(); ++r) {
    const auto lags = diag::connectivity_draws(
        d.theta_grp.topRows(d.rows()).middleCols(r * lt, lt),
        d.a_grp.topRows(d.rows()).middleCols(r * la, la), P, spec.Q, spec.m);
    for (std::size_t h = 0; h < lags.size(); ++h) {
      const auto summaries = diag::summarize_columns(lags[h], level, 1);
      for (Index e = 0; e < P * P; ++e) {
        const Index to = e % P;
        const Index from = e / P;
        if (to == from) continue;
        const auto& s = summaries[static_cast<std::size_t>(e)];
        const bool sig = s.quantile_lo > 0.0 || s.quantile_hi < 0.0;
        ss << r << '\t' << h + 1 << '\t' << from << '\t' << to << '\t' << fmt(s.mean)
           << '\t' << fmt(s.quantile_lo) << '\t' << fmt(s.quantile_hi) << '\t'
           << (sig ? 1 : 0) << '\n';
      }
    }
  }
  write_file_atomic(path, ss.str());
}

void write_run_metadata(const std::filesystem::path& path, const std::string& mode,
                        std::uint64_t seed, const std::string& config_hash,
                        const std::string& extra_json) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream when;
  when << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json doc = {{"tool", "ressm"},
              {"version", kVersion},
              {"mode", mode},
              {"seed", seed},
              {"config_hash", config_hash},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"written_utc", when.str()},
              {"extra", json::parse(extra_json)}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::string coverage_report_json(const bench::CoverageReport& rep) {
  auto arm = [](const std::vector<bench::CoverageResult>& results) {
    json reps = json::array();
    bench::CoverageResult total;
    for (const auto& r : results) {
      reps.push_back({{"a_grp", rate_json(r.a_grp)},
                      {"theta_grp", rate_json(r.theta_grp)},
                      {"a_sub", rate_json(r.a_sub)},
                      {"theta_sub", rate_json(r.theta_sub)},
                      {"ree_a_grp", r.ree_a_grp},
                      {"ree_theta_grp", r.ree_theta_grp},
                      {"diag_detected", rate_json(r.diag_detected)},
                      {"offdiag_false", rate_json(r.offdiag_false)}});
      total.a_grp += r.a_grp;
      total.theta_grp += r.theta_grp;
      total.a_sub += r.a_sub;
      total.theta_sub += r.theta_sub;
      total.diag_detected += r.diag_detected;
      total.offdiag_false += r.offdiag_false;
    }
    return json{{"replicates", reps},
                {"pooled",
                 {{"a_grp", rate_json(total.a_grp)},
                  {"theta_grp", rate_json(total.theta_grp)},
                  {"a_sub", rate_json(total.a_sub)},
                  {"theta_sub", rate_json(total.theta_sub)},
                  {"diag_detected", rate_json(total.diag_detected)},
                  {"offdiag_false", rate_json(total.offdiag_false)}}}};
  };
  json doc = {{"study", "coverage"}, {"full", arm(rep.full)},
              {"failures", failures_json(rep.failures)}};
  if (!rep.fixed_all.empty()) doc["fixed_all"] = arm(rep.fixed_all);
  return doc.dump(2);
}

std::string sign_report_json(const bench::SignReport& rep) {
  json arms = json::array();
  for (std::size_t a = 0; a < rep.arms.size(); ++a) {
    json reps = json::array();
    bench::Rate seg, sub;
    for (const auto& row : rep.results) {
      const auto& r = row[a];
      reps.push_back({{"csir_segment", rate_json(r.csir_segment)},
                      {"csir_subject", rate_json(r.csir_subject)},
                      {"mee", r.mee}});
      seg += r.csir_segment;
      sub += r.csir_subject;
    }
    arms.push_back({{"arm", rep.arms[a].name},
                    {"csir_segment", rate_json(seg)},
                    {"csir_subject", rate_json(sub)},
                    {"replicates", reps}});
  }
  return json{{"study", "sign"}, {"arms", arms}, {"failures", failures_json(rep.failures)}}
      .dump(2);
}

std::string dic_report_json(const bench::DicReport& rep) {
  json reps = json::array();
  for (const auto& row : rep.results) {
    json cands = json::array();
    for (const auto& e : row) {
      cands.push_back({{"Q", e.Q},
                       {"m", e.m},
                       {"cDIC", e.cdic},
                       {"DIC1", e.dic1},
                       {"DIC2", e.dic2},
                       {"DIC3", e.dic3},
                       {"p_D", e.p_d},
                       {"p_V", e.p_v}});
    }
    reps.push_back(cands);
  }
  return json{{"study", "dic"}, {"replicates", reps}, {"failures", failures_json(rep.failures)}}
      .dump(2);
}

}  // namespace ressm::io
