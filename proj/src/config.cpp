#include "ressm/io/config.hpp"

#include "ressm/core/error.hpp"
#include "ressm/io/tensor_file.hpp"

#include <json.hpp>

#include <cstdio>
#include <set>

namespace ressm::io {
namespace {

using nlohmann::json;

const std::set<std::string> kModes = {"simulate", "fit",          "dic",
                                      "summarize", "connectivity", "bench"};
const std::set<std::string> kStudies = {"coverage", "sign", "dic", "perf"};
const std::set<std::string> kHyperKeys = {
    "nu_u",    "nu_v",    "nu_psi",  "nu_gamma", "nu_a",
    "nu_theta", "kappa_u", "kappa_v", "kappa_psi", "kappa_gamma",
    "kappa_a", "kappa_theta", "a0",   "b0",       "population_precision",
    "initial_state_precision"};
const std::set<std::string> kScheduleKeys = {
    "n_iter",           "n_burnin",       "thin",
    "n_init_iter",      "sign_tracking",  "rho0",
    "sign_check_start", "sign_check_end", "sign_check_every"};

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ValidationError(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

double number(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(doc,
             {"mode", "data", "out", "resume", "seed", "threads", "model", "hyper",
              "schedule", "output", "scenario", "bench"},
             "config");
  RunConfig c;
  read(doc, "mode", c.mode, "config");
  read(doc, "data", c.data, "config");
  read(doc, "out", c.out, "config");
  read(doc, "resume", c.resume, "config");
  read(doc, "seed", c.seed, "config");
  read(doc, "threads", c.threads, "config");
  if (!kModes.contains(c.mode)) throw ValidationError("config.mode: unknown mode \"" + c.mode + "\"");

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    check_keys(m, {"Q", "m", "mode"}, "config.model");
    read(m, "Q", c.spec.Q, "config.model");
    read(m, "m", c.spec.m, "config.model");
    if (m.contains("mode")) {
      try {
        c.spec.mode = model::fit_mode_from_string(m["mode"].get<std::string>());
      } catch (const std::exception& e) {
        throw ValidationError(std::string("config.model.mode: ") + e.what());
      }
    }
  }
  if (doc.contains("hyper")) {
    check_keys(doc["hyper"], kHyperKeys, "config.hyper");
    for (const auto& [key, value] : doc["hyper"].items()) {
      c.hyper_overrides[key] = number(value, "config.hyper." + key);
    }
  }
  if (doc.contains("schedule")) {
    auto allowed = kScheduleKeys;
    allowed.insert("scale");
    check_keys(doc["schedule"], allowed, "config.schedule");
    for (const auto& [key, value] : doc["schedule"].items()) {
      if (key == "scale") {
        c.scale = number(value, "config.schedule.scale");
      } else {
        c.schedule_overrides[key] = number(value, "config.schedule." + key);
      }
    }
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    check_keys(o, {"record_plugin", "record_fitted", "checkpoint_every",
                   "edge_threshold", "level"},
               "config.output");
    read(o, "record_plugin", c.record_plugin, "config.output");
    read(o, "record_fitted", c.record_fitted, "config.output");
    read(o, "checkpoint_every", c.checkpoint_every, "config.output");
    read(o, "edge_threshold", c.edge_threshold, "config.output");
    read(o, "level", c.level, "config.output");
  }
  if (doc.contains("scenario")) {
    const auto& s = doc["scenario"];
    const std::string w = "config.scenario";
    check_keys(s, {"groups", "subjects", "segments", "P", "Q", "m", "K", "noise_var",
                   "dispersion", "warmup", "reject_nonstationary"},
               w);
    auto& sc = c.scenario;
    read(s, "groups", sc.groups, w);
    read(s, "subjects", sc.subjects, w);
    read(s, "segments", sc.segments, w);
    read(s, "P", sc.P, w);
    read(s, "Q", sc.Q, w);
    read(s, "m", sc.m, w);
    read(s, "K", sc.K, w);
    read(s, "noise_var", sc.noise_var, w);
    read(s, "dispersion", sc.dispersion, w);
    read(s, "warmup", sc.warmup, w);
    read(s, "reject_nonstationary", sc.reject_nonstationary, w);
  }
  if (doc.contains("bench")) {
    const auto& b = doc["bench"];
    check_keys(b, {"study", "replicates", "workers"}, "config.bench");
    read(b, "study", c.bench.study, "config.bench");
    read(b, "replicates", c.bench.replicates, "config.bench");
    read(b, "workers", c.bench.workers, "config.bench");
    if (!kStudies.contains(c.bench.study)) {
      throw ValidationError("config.bench.study: unknown study \"" + c.bench.study + "\"");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& c) {
  const auto sched = resolve_schedule(c);
  const auto& sc = c.scenario;
  const json doc = {
      {"mode", c.mode},
      {"data", c.data},
      {"out", c.out},
      {"resume", c.resume},
      {"seed", c.seed},
      {"threads", c.threads},
      {"model", {{"Q", c.spec.Q}, {"m", c.spec.m}, {"mode", model::to_string(c.spec.mode)}}},
      {"hyper", c.hyper_overrides},
      {"schedule",
       {{"scale", c.scale},
        {"n_iter", sched.n_iter},
        {"n_burnin", sched.n_burnin},
        {"thin", sched.thin},
        {"n_init_iter", sched.n_init_iter},
        {"sign_tracking", sched.sign_tracking},
        {"rho0", sched.rho0},
        {"sign_check_start", sched.sign_check_start},
        {"sign_check_end", sched.sign_check_end},
        {"sign_check_every", sched.sign_check_every}}},
      {"output",
       {{"record_plugin", c.record_plugin},
        {"record_fitted", c.record_fitted},
        {"checkpoint_every", c.checkpoint_every},
        {"edge_threshold", c.edge_threshold},
        {"level", c.level}}},
      {"scenario",
       {{"groups", sc.groups},
        {"subjects", sc.subjects},
        {"segments", sc.segments},
        {"P", sc.P},
        {"Q", sc.Q},
        {"m", sc.m},
        {"K", sc.K},
        {"noise_var", sc.noise_var},
        {"dispersion", sc.dispersion},
        {"warmup", sc.warmup},
        {"reject_nonstationary", sc.reject_nonstationary}}},
      {"bench",
       {{"study", c.bench.study},
        {"replicates", c.bench.replicates},
        {"workers", c.bench.workers}}}};
  return doc.dump(2);
}

std::string config_hash(const RunConfig& c) {
  const auto text = dump_config(c);
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(text.data(), text.size()));
  return buf;
}

model::Hyperparams resolve_hyperparams(const RunConfig& c, Index P) {
  auto h = model::default_hyperparams(P, c.spec.Q, c.spec.m);
  const std::map<std::string, double*> fields = {
      {"nu_u", &h.nu_u},
      {"nu_v", &h.nu_v},
      {"nu_psi", &h.nu_psi},
      {"nu_gamma", &h.nu_gamma},
      {"nu_a", &h.nu_a},
      {"nu_theta", &h.nu_theta},
      {"kappa_u", &h.kappa_u},
      {"kappa_v", &h.kappa_v},
      {"kappa_psi", &h.kappa_psi},
      {"kappa_gamma", &h.kappa_gamma},
      {"kappa_a", &h.kappa_a},
      {"kappa_theta", &h.kappa_theta},
      {"a0", &h.a0},
      {"b0", &h.b0},
      {"population_precision", &h.population_precision},
      {"initial_state_precision", &h.initial_state_precision}};
  for (const auto& [key, value] : c.hyper_overrides) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ValidationError("unknown hyperparameter \"" + key + "\"");
    *it->second = value;
  }
  return h;
}

model::MCMCSchedule resolve_schedule(const RunConfig& c) {
  auto s = model::default_schedule(c.scale);
  const auto& o = c.schedule_overrides;
  auto get = [&](const char* key, auto& dst) {
    if (const auto it = o.find(key); it != o.end()) {
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(it->second);
    }
  };
  get("n_iter", s.n_iter);
  get("n_burnin", s.n_burnin);
  get("thin", s.thin);
  if (o.contains("n_burnin")) {
    s.n_init_iter = s.n_burnin;
    s.sign_check_start = s.n_burnin / 2;
    s.sign_check_end = s.n_burnin;
  }
  get("n_init_iter", s.n_init_iter);
  get("sign_check_start", s.sign_check_start);
  get("sign_check_end", s.sign_check_end);
  get("sign_check_every", s.sign_check_every);
  get("rho0", s.rho0);
  if (const auto it = o.find("sign_tracking"); it != o.end()) {
    s.sign_tracking = it->second != 0.0;
  }
  return s;
}

}  // namespace ressm::io
