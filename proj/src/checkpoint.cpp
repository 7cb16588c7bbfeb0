#include "ressm/io/checkpoint.hpp"

#include "ressm/core/error.hpp"
#include "ressm/io/tensor_file.hpp"

#include <json.hpp>

namespace ressm::io {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Tensor vector_tensor(const std::vector<double>& v) {
  return {{static_cast<std::uint64_t>(v.size())}, v};
}

std::vector<double> tensor_vector(const Tensor& t) { return t.values; }

class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) {}

  void put(const std::string& name, const Tensor& t) const {
    write_tensor(dir_ / (name + ".rssm"), t);
  }
  void put(const std::string& name, const Matrix& m) const { put(name, to_tensor(m)); }
  void put(const std::string& name, const std::vector<Matrix>& v) const {
    put(name, stack(v));
  }
  void put(const std::string& name, const std::vector<double>& v) const {
    put(name, vector_tensor(v));
  }

  Tensor tensor(const std::string& name) const {
    return read_tensor(dir_ / (name + ".rssm"));
  }
  Matrix matrix(const std::string& name) const {
    return to_matrix(tensor(name), (dir_ / name).string());
  }
  std::vector<Matrix> matrices(const std::string& name) const {
    return unstack(tensor(name), (dir_ / name).string());
  }
  std::vector<double> values(const std::string& name) const {
    return tensor_vector(tensor(name));
  }

 private:
  fs::path dir_;
};

void put_state(const Bundle& b, const std::string& p, const model::ChainState& st) {
  b.put(p + "M", st.M);
  b.put(p + "a_seg", st.a_seg);
  b.put(p + "a_sub", st.a_sub);
  b.put(p + "a_grp", st.a_grp);
  b.put(p + "a_pop", st.a_pop);
  b.put(p + "theta_seg", st.theta_seg);
  b.put(p + "theta_sub", st.theta_sub);
  b.put(p + "theta_grp", st.theta_grp);
  b.put(p + "theta_pop", st.theta_pop);
  b.put(p + "prec_v", st.prec_v);
  b.put(p + "prec_gamma", st.prec_gamma);
  b.put(p + "prec_a", st.prec_a);
  b.put(p + "prec_u", st.prec_u);
  b.put(p + "prec_psi", st.prec_psi);
  b.put(p + "prec_theta", st.prec_theta);
  b.put(p + "sigma2", st.sigma2);
}

model::ChainState get_state(const Bundle& b, const std::string& p) {
  model::ChainState st;
  st.M = b.matrices(p + "M");
  st.a_seg = b.matrices(p + "a_seg");
  st.a_sub = b.matrices(p + "a_sub");
  st.a_grp = b.matrices(p + "a_grp");
  st.a_pop = b.matrix(p + "a_pop");
  st.theta_seg = b.matrices(p + "theta_seg");
  st.theta_sub = b.matrices(p + "theta_sub");
  st.theta_grp = b.matrices(p + "theta_grp");
  st.theta_pop = b.matrix(p + "theta_pop");
  st.prec_v = b.matrices(p + "prec_v");
  st.prec_gamma = b.matrices(p + "prec_gamma");
  st.prec_a = b.matrix(p + "prec_a");
  st.prec_u = b.matrices(p + "prec_u");
  st.prec_psi = b.matrices(p + "prec_psi");
  st.prec_theta = b.matrix(p + "prec_theta");
  st.sigma2 = b.values(p + "sigma2");
  return st;
}

Matrix audit_matrix(const ident::SignAudit& audit) {
  Matrix m(static_cast<Index>(audit.records.size()), 8);
  for (std::size_t k = 0; k < audit.records.size(); ++k) {
    const auto& r = audit.records[k];
    m.row(static_cast<Index>(k)) << r.iteration, static_cast<double>(r.level), r.r,
        r.i, r.j, r.q, r.cosine, r.flipped ? 1.0 : 0.0;
  }
  return m;
}

ident::SignAudit audit_from(const Matrix& m) {
  ident::SignAudit audit;
  for (Index k = 0; k < m.rows(); ++k) {
    ident::SignRecord r;
    r.iteration = static_cast<int>(m(k, 0));
    r.level = static_cast<ident::Level>(static_cast<int>(m(k, 1)));
    r.r = static_cast<int>(m(k, 2));
    r.i = static_cast<int>(m(k, 3));
    r.j = static_cast<int>(m(k, 4));
    r.q = static_cast<int>(m(k, 5));
    r.cosine = m(k, 6);
    r.flipped = m(k, 7) != 0.0;
    audit.records.push_back(r);
  }
  return audit;
}

}  // namespace

void write_state(const fs::path& dir, const model::ChainState& state) {
  put_state(Bundle(dir), "", state);
}

model::ChainState read_state(const fs::path& dir) {
  return get_state(Bundle(dir), "");
}

void write_checkpoint(const fs::path& dir, const gibbs::ChainOutput& out,
                      const std::string& meta_json) {
  auto staging = dir;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  const Bundle b(staging);

  const auto& d = out.draws;
  const Index rows = d.rows();
  b.put("draws_iterations",
        std::vector<double>(d.iterations.begin(), d.iterations.end()));
  const std::pair<const char*, const Matrix*> draw_fields[] = {
      {"draws_a_pop", &d.a_pop},         {"draws_a_grp", &d.a_grp},
      {"draws_a_sub", &d.a_sub},         {"draws_theta_pop", &d.theta_pop},
      {"draws_theta_grp", &d.theta_grp}, {"draws_theta_sub", &d.theta_sub},
      {"draws_cov_diag", &d.cov_diag},   {"draws_sigma2", &d.sigma2}};
  for (const auto& [name, m] : draw_fields) {
    b.put(name, Matrix(m->topRows(std::min(rows, m->rows()))));
  }

  b.put("trace_complete", out.trace.complete);
  b.put("trace_plugin", out.trace.plugin);
  b.put("trace_conditional", out.trace.conditional);

  const auto& s = out.sums;
  if (s.count > 0) put_state(b, "sums_", s.state);
  b.put("sums_cov_v", s.cov_v);
  b.put("sums_cov_gamma", s.cov_gamma);
  b.put("sums_cov_u", s.cov_u);
  b.put("sums_cov_psi", s.cov_psi);
  b.put("sums_cov_a", s.cov_a);
  b.put("sums_cov_theta", s.cov_theta);
  b.put("sums_fitted", s.fitted);

  b.put("audit", audit_matrix(out.audit));
  b.put("stage1_theta0_mean", out.stage1.theta0_mean);
  b.put("stage1_loglik", out.stage1.loglik);
  put_state(b, "state_", out.state);

  json index = {{"format", "ressm-checkpoint"},
                {"version", 1},
                {"iterations_done", out.iterations_done},
                {"sums_count", s.count},
                {"stage1_iterations", out.stage1.iterations},
                {"has_conditional_at_mean", out.has_conditional_at_mean},
                {"conditional_at_mean_bits",
                 std::bit_cast<std::uint64_t>(out.conditional_at_mean)},
                {"meta", json::parse(meta_json)}};
  write_file_atomic(staging / "checkpoint.json", index.dump(2) + "\n");

  auto old = dir;
  old += ".old";
  fs::remove_all(old);
  if (fs::exists(dir)) fs::rename(dir, old);
  fs::rename(staging, dir);
  fs::remove_all(old);
}

Checkpoint read_checkpoint(const fs::path& dir) {
  const auto index_path = dir / "checkpoint.json";
  json index;
  try {
    index = json::parse(read_file(index_path));
  } catch (const json::exception& e) {
    throw IoError(index_path.string() + ": malformed checkpoint index: " + e.what());
  }
  if (index.value("format", "") != "ressm-checkpoint") {
    throw IoError(index_path.string() + ": not a checkpoint");
  }
  const Bundle b(dir);
  Checkpoint cp;
  auto& out = cp.output;
  auto& d = out.draws;
  for (const double it : b.values("draws_iterations")) {
    d.iterations.push_back(static_cast<int>(it));
  }
  d.a_pop = b.matrix("draws_a_pop");
  d.a_grp = b.matrix("draws_a_grp");
  d.a_sub = b.matrix("draws_a_sub");
  d.theta_pop = b.matrix("draws_theta_pop");
  d.theta_grp = b.matrix("draws_theta_grp");
  d.theta_sub = b.matrix("draws_theta_sub");
  d.cov_diag = b.matrix("draws_cov_diag");
  d.sigma2 = b.matrix("draws_sigma2");

  out.trace.complete = b.values("trace_complete");
  out.trace.plugin = b.values("trace_plugin");
  out.trace.conditional = b.values("trace_conditional");

  auto& s = out.sums;
  s.count = index.at("sums_count").get<int>();
  if (s.count > 0) s.state = get_state(b, "sums_");
  s.cov_v = b.matrices("sums_cov_v");
  s.cov_gamma = b.matrices("sums_cov_gamma");
  s.cov_u = b.matrices("sums_cov_u");
  s.cov_psi = b.matrices("sums_cov_psi");
  s.cov_a = b.matrix("sums_cov_a");
  s.cov_theta = b.matrix("sums_cov_theta");
  s.fitted = b.matrices("sums_fitted");
  if (s.count == 0) {
    s.cov_a.resize(0, 0);
    s.cov_theta.resize(0, 0);
  }

  out.audit = audit_from(b.matrix("audit"));
  out.stage1.theta0_mean = b.matrix("stage1_theta0_mean");
  out.stage1.iterations = index.at("stage1_iterations").get<int>();
  out.stage1.loglik = b.values("stage1_loglik");
  out.state = get_state(b, "state_");
  out.iterations_done = index.at("iterations_done").get<int>();
  out.has_conditional_at_mean = index.at("has_conditional_at_mean").get<bool>();
  out.conditional_at_mean =
      std::bit_cast<double>(index.at("conditional_at_mean_bits").get<std::uint64_t>());
  cp.meta_json = index.at("meta").dump();
  return cp;
}

}  // namespace ressm::io
