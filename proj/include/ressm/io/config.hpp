#pragma once

#include "ressm/model/spec.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ressm::io {

/// Synthetic design for simulate and bench: the two-group reference
/// design at the given sizes. `dispersion` scales every between-segment
/// and between-subject spread (0 gives identical units).
struct ScenarioConfig {
  int groups = 2;
  int subjects = 20;
  int segments = 10;
  Index P = 8;
  Index Q = 2;
  Index m = 2;
  Index K = 250;
  double noise_var = 0.16;
  double dispersion = 1.0;
  int warmup = 500;
  bool reject_nonstationary = true;
};

struct BenchConfig {
  std::string study = "coverage";  // coverage | sign | dic | perf
  int replicates = 5;
  int workers = 1;  // concurrent replicates
};

/// Everything one CLI invocation needs. JSON schema (all keys optional):
///   {"mode": "fit", "data": "...", "out": "...", "resume": "...",
///    "seed": 1, "threads": 1,
///    "model": {"Q": 2, "m": 1, "mode": "full"},
///    "hyper": {"nu_u": ..., "kappa_a": ..., "a0": ..., ...},
///    "schedule": {"scale": 1.0, "n_iter": ..., "n_burnin": ..., "thin": ...,
///                 "n_init_iter": ..., "sign_tracking": true, "rho0": 0.0,
///                 "sign_check_start": ..., "sign_check_end": ...,
///                 "sign_check_every": 10},
///    "output": {"record_plugin": true, "record_fitted": true,
///               "checkpoint_every": 0, "edge_threshold": 0.05,
///               "level": 0.95},
///    "scenario": {...ScenarioConfig fields...},
///    "bench": {"study": "coverage", "replicates": 5, "workers": 1}}
/// "hyper" entries override default_hyperparams(P, Q, m) once P is known.
struct RunConfig {
  std::string mode = "fit";
  std::string data;
  std::string out = "ressm_out";
  std::string resume;
  std::uint64_t seed = 1;
  int threads = 1;
  model::ModelSpec spec;
  std::map<std::string, double> hyper_overrides;
  double scale = 1.0;
  /// Keys of MCMCSchedule; applied over default_schedule(scale).
  std::map<std::string, double> schedule_overrides;
  bool record_plugin = true;
  bool record_fitted = true;
  int checkpoint_every = 0;
  double edge_threshold = 0.05;
  double level = 0.95;
  ScenarioConfig scenario;
  BenchConfig bench;
};

/// Parses JSON text over the defaults. Unknown keys and bad values throw
/// ValidationError naming the key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Canonical JSON of every field (sorted keys, resolved schedule).
std::string dump_config(const RunConfig& config);
/// CRC32 of dump_config, as 8 hex digits.
std::string config_hash(const RunConfig& config);

/// default_hyperparams(P, Q, m) with the config's overrides applied.
model::Hyperparams resolve_hyperparams(const RunConfig& config, Index P);
/// default_schedule(scale) with the overrides applied. When n_burnin is
/// overridden, the sign window and stage-1 length follow it unless they
/// are overridden too.
model::MCMCSchedule resolve_schedule(const RunConfig& config);

}  // namespace ressm::io
