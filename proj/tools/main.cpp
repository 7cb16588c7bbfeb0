#include "ressm/bench/bench.hpp"
#include "ressm/core/error.hpp"
#include "ressm/diag/connectivity.hpp"
#include "ressm/diag/dic.hpp"
#include "ressm/gibbs/chain.hpp"
#include "ressm/io/checkpoint.hpp"
#include "ressm/io/config.hpp"
#include "ressm/io/dataset_io.hpp"
#include "ressm/io/outputs.hpp"
#include "ressm/io/tensor_file.hpp"
#include "ressm/sim/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace ressm;
namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kIo = 3, kNumerical = 4, kFailed = 5 };

sim::SimScenario make_scenario(const io::ScenarioConfig& c) {
  const auto layout = model::HierLayout::balanced(c.groups, c.subjects, c.segments);
  auto sc = sim::reference_scenario(layout, c.P, c.Q, c.m, c.K);
  sc.noise_var.assign(static_cast<std::size_t>(c.groups), c.noise_var);
  sc.a_seg_var *= c.dispersion * c.dispersion;
  sc.a_sub_var *= c.dispersion * c.dispersion;
  sc.sigma_u *= c.dispersion;
  sc.sigma_psi *= c.dispersion;
  sc.warmup = c.warmup;
  sc.policy = c.reject_nonstationary ? sim::StationarityPolicy::kReject
                                     : sim::StationarityPolicy::kAllow;
  return sc;
}

std::string chain_meta(const io::RunConfig& cfg, const model::HierDataset& data,
                       const model::ModelSpec& spec) {
  return json{{"P", data.P},
              {"K", data.K},
              {"Q", spec.Q},
              {"m", spec.m},
              {"mode", model::to_string(spec.mode)},
              {"layout", data.layout.counts()},
              {"seed", cfg.seed},
              {"config_hash", io::config_hash(cfg)}}
      .dump();
}

struct ChainContext {
  io::Checkpoint checkpoint;
  model::HierLayout layout;
  model::ModelSpec spec;
  Index P = 0;
};

ChainContext load_chain(const std::string& dir) {
  if (dir.empty()) throw ValidationError("this mode needs --chain DIR (a fit's chain/ directory)");
  ChainContext c;
  c.checkpoint = io::read_checkpoint(dir);
  const auto meta = json::parse(c.checkpoint.meta_json);
  c.layout = model::HierLayout(meta.at("layout").get<std::vector<std::vector<int>>>());
  c.spec.Q = meta.at("Q").get<Index>();
  c.spec.m = meta.at("m").get<Index>();
  c.spec.mode = model::fit_mode_from_string(meta.at("mode").get<std::string>());
  c.P = meta.at("P").get<Index>();
  return c;
}

int cmd_simulate(const io::RunConfig& cfg) {
  const auto sc = make_scenario(cfg.scenario);
  const auto res = sim::simulate_hierarchy(sc, cfg.seed, cfg.threads);
  const fs::path out(cfg.out);
  const auto manifest = io::write_dataset(out / "data", res.data);
  io::write_state(out / "truth", res.truth);
  io::write_run_metadata(out / "metadata.json", "simulate", cfg.seed, io::config_hash(cfg),
                         json{{"manifest", manifest.string()}}.dump());
  std::cout << "wrote " << res.data.layout.total_segments() << " segments to " << manifest.string()
            << "\n";
  return kOk;
}

int cmd_fit(const io::RunConfig& cfg) {
  if (cfg.data.empty()) throw ValidationError("fit needs --data MANIFEST");
  const auto data = io::read_dataset(cfg.data);
  const auto hyper = io::resolve_hyperparams(cfg, data.P);
  const auto schedule = io::resolve_schedule(cfg);
  const fs::path out(cfg.out);
  const auto meta = chain_meta(cfg, data, cfg.spec);

  gibbs::RunOptions opt;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.record_plugin = cfg.record_plugin;
  opt.record_fitted = cfg.record_fitted;
  opt.checkpoint_every = cfg.checkpoint_every;
  opt.on_checkpoint = [&](const gibbs::ChainOutput& o) {
    io::write_checkpoint(out / "checkpoint", o, meta);
  };
  int last_decile = -1;
  opt.on_progress = [&](const gibbs::Progress& p) {
    const int decile = p.total > 0 ? 10 * p.iteration / p.total : 10;
    if (decile != last_decile || p.iteration == p.total) {
      std::cerr << p.phase << " " << p.iteration << "/" << p.total << " (" << p.seconds
                << " s)\n";
      last_decile = decile;
    }
  };

  std::optional<io::Checkpoint> resume;
  if (!cfg.resume.empty()) {
    resume = io::read_checkpoint(cfg.resume);
    const auto saved = json::parse(resume->meta_json);
    if (saved.value("seed", std::uint64_t{0}) != cfg.seed) {
      throw ValidationError("resume: checkpoint was written with seed " +
                            std::to_string(saved.value("seed", std::uint64_t{0})));
    }
  }
  const auto result = gibbs::run_chain(data, cfg.spec, hyper, schedule, opt,
                                       resume ? &resume->output : nullptr);

  io::write_checkpoint(out / "chain", result, meta);
  io::write_state(out / "posterior_mean", result.posterior_mean());
  io::write_draw_tensors(out / "draws", result.draws);
  io::write_summaries(out / "summaries.tsv", result, data.layout, cfg.spec, data.P, cfg.level);
  io::write_draws_long(out / "draws_long.tsv", result, data.layout, cfg.spec, data.P);
  io::write_sign_audit(out / "sign_audit.tsv", result.audit);
  io::write_trace(out / "loglik_trace.tsv", result.trace, result.draws.iterations);

  json extra = {{"iterations", result.iterations_done},
                {"kept", result.draws.rows()},
                {"sign_flips", result.audit.flips()},
                {"resumed", resume.has_value()}};
  if (cfg.record_plugin && result.draws.rows() > 0) {
    extra["cDIC"] = diag::compute_cdic(result.trace.complete, result.trace.plugin);
  }
  io::write_run_metadata(out / "metadata.json", "fit", cfg.seed, io::config_hash(cfg),
                         extra.dump());
  std::cout << "kept " << result.draws.rows() << " draws, " << result.audit.flips()
            << " sign flips; outputs in " << out.string() << "\n";
  return kOk;
}

int cmd_dic(const io::RunConfig& cfg, const std::string& chain_dir) {
  const auto c = load_chain(chain_dir);
  const auto& o = c.checkpoint.output;
  const auto e = bench::dic_entry(o, c.spec);
  io::DicRow row;
  row.label = "Q=" + std::to_string(c.spec.Q) + ",m=" + std::to_string(c.spec.m);
  row.cdic = e.cdic;
  row.variants = diag::compute_dic_variants(o.trace.conditional, o.conditional_at_mean);
  io::write_dic_table(fs::path(cfg.out) / "dic.tsv", {row});
  std::cout << row.label << "\tcDIC " << e.cdic << "\tDIC1 " << e.dic1 << "\tDIC2 " << e.dic2
            << "\tDIC3 " << e.dic3 << "\n";
  return kOk;
}

int cmd_summarize(const io::RunConfig& cfg, const std::string& chain_dir) {
  const auto c = load_chain(chain_dir);
  const auto path = fs::path(cfg.out) / "summaries.tsv";
  io::write_summaries(path, c.checkpoint.output, c.layout, c.spec, c.P, cfg.level);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_connectivity(const io::RunConfig& cfg, const std::string& chain_dir) {
  const auto c = load_chain(chain_dir);
  const auto mean = c.checkpoint.output.posterior_mean();
  const fs::path out = fs::path(cfg.out) / "connectivity";
  io::write_connectivity(out, diag::connectivity_set(mean), c.layout, cfg.edge_threshold);
  io::write_connectivity_significance(out / "group_significance.tsv", c.checkpoint.output.draws,
                                      c.layout, c.spec, c.P, cfg.level);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

int cmd_bench(const io::RunConfig& cfg) {
  const auto sc = make_scenario(cfg.scenario);
  const auto schedule = io::resolve_schedule(cfg);
  const auto& b = cfg.bench;
  auto progress = [&](int k) { std::cerr << "replicate " << k << " done\n"; };
  std::string report;
  if (b.study == "coverage") {
    bench::CoverageStudy study{sc, schedule, b.replicates, true, cfg.level};
    report = io::coverage_report_json(
        bench::run_coverage_study(study, cfg.seed, b.workers, progress));
  } else if (b.study == "sign") {
    bench::SignStudy study{sc, schedule, b.replicates};
    report = io::sign_report_json(bench::run_sign_study(study, cfg.seed, b.workers, progress));
  } else if (b.study == "dic") {
    bench::DicStudy study;
    study.scenario = sc;
    study.schedule = schedule;
    study.replicates = b.replicates;
    study.q_values = {std::max<Index>(1, sc.Q - 1), sc.Q, sc.Q + 1};
    report = io::dic_report_json(bench::run_dic_study(study, cfg.seed, b.workers, progress));
  } else {
    const auto r = bench::run_perf(sc, std::max(1, b.replicates), cfg.seed, cfg.threads);
    report = json{{"study", "perf"},
                  {"seconds_per_iteration", r.seconds_per_iteration},
                  {"iterations", r.iterations},
                  {"threads", r.threads}}
                 .dump(2);
  }
  const fs::path out(cfg.out);
  io::write_file_atomic(out / ("bench_" + b.study + ".json"), report + "\n");
  io::write_run_metadata(out / "metadata.json", "bench", cfg.seed, io::config_hash(cfg));
  std::cout << report << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ressm: hierarchical random-effects state-space models for multi-subject EEG"};
  std::string config_path, mode, out, data, resume, chain, model_mode, study;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, iters, burnin, thin, checkpoint_every, replicates;
  std::optional<Index> q, m;
  std::optional<double> rho0, scale;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "simulate | fit | dic | summarize | connectivity | bench")
      ->check(CLI::IsMember({"simulate", "fit", "dic", "summarize", "connectivity", "bench"}));
  app.add_option("--seed", seed, "master seed (unsigned 64-bit)");
  app.add_option("--threads", threads, "worker threads (default: RESSM_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--iters", iters, "total MCMC iterations")->check(CLI::PositiveNumber);
  app.add_option("--burnin", burnin, "burn-in iterations")->check(CLI::NonNegativeNumber);
  app.add_option("--thin", thin, "keep every n-th post-burn-in draw")->check(CLI::PositiveNumber);
  app.add_option("--q", q, "number of latent states")->check(CLI::PositiveNumber);
  app.add_option("--m", m, "MVAR order")->check(CLI::PositiveNumber);
  app.add_option("--model-mode", model_mode, "full | fixed-loading | fixed-all")
      ->check(CLI::IsMember({"full", "fixed-loading", "fixed-all"}));
  app.add_option("--rho0", rho0, "sign-tracking cosine threshold");
  app.add_option("--scale", scale, "schedule scale relative to 7500/2500/10")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.add_option("--data", data, "dataset manifest (fit)");
  app.add_option("--resume", resume, "checkpoint directory to continue (fit)");
  app.add_option("--chain", chain, "finished chain directory (dic, summarize, connectivity)");
  app.add_option("--checkpoint-every", checkpoint_every, "checkpoint period in iterations")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--study", study, "bench study: coverage | sign | dic | perf")
      ->check(CLI::IsMember({"coverage", "sign", "dic", "perf"}));
  app.add_option("--replicates", replicates, "bench replicates (perf: timed sweeps)")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = config_path.empty() ? io::RunConfig{} : io::load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    if (!out.empty()) cfg.out = out;
    if (!data.empty()) cfg.data = data;
    if (!resume.empty()) cfg.resume = resume;
    if (seed) cfg.seed = *seed;
    if (threads) {
      cfg.threads = *threads;
    } else if (const char* env = std::getenv("RESSM_THREADS"); env && config_path.empty()) {
      cfg.threads = std::max(1, std::atoi(env));
    }
    if (q) cfg.spec.Q = *q;
    if (m) cfg.spec.m = *m;
    if (!model_mode.empty()) cfg.spec.mode = model::fit_mode_from_string(model_mode);
    if (scale) cfg.scale = *scale;
    if (iters) cfg.schedule_overrides["n_iter"] = *iters;
    if (burnin) cfg.schedule_overrides["n_burnin"] = *burnin;
    if (thin) cfg.schedule_overrides["thin"] = *thin;
    if (rho0) cfg.schedule_overrides["rho0"] = *rho0;
    if (checkpoint_every) cfg.checkpoint_every = *checkpoint_every;
    if (!study.empty()) cfg.bench.study = study;
    if (replicates) cfg.bench.replicates = *replicates;

    if (cfg.mode == "simulate") return cmd_simulate(cfg);
    if (cfg.mode == "fit") return cmd_fit(cfg);
    if (cfg.mode == "dic") return cmd_dic(cfg, chain);
    if (cfg.mode == "summarize") return cmd_summarize(cfg, chain);
    if (cfg.mode == "connectivity") return cmd_connectivity(cfg, chain);
    return cmd_bench(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
