// Command-line harness: dataset generation, solving, evaluation and
// self-checks for the FMO deblurring toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "fmo/bench.hpp"

namespace {

fmo::BenchConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return fmo::BenchConfig{};
  return fmo::load_bench_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast-moving-object deblurring benchmark toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --config/--jobs after the subcommand too

  std::string config_path;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON config file")
      ->envname("FMO_CONFIG");
  app.add_option("--jobs", jobs, "worker pool width")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out = "dataset";
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> count_flag;
  synth->add_option("--out", synth_out, "output dataset directory");
  synth->add_option("--seed", seed_flag, "master seed (overrides config)");
  synth->add_option("--count", count_flag, "sample count (overrides config)");

  // solve
  auto* solve = app.add_subcommand("solve", "run the solver on a dataset");
  std::string solve_dataset = "dataset", solve_out = "est";
  bool no_timing = false;
  solve->add_option("--dataset", solve_dataset, "dataset directory");
  solve->add_option("--out", solve_out, "estimate output directory");
  solve->add_option("--seed", seed_flag, "solver seed (overrides config)");
  solve->add_flag("--no-timing", no_timing,
                  "record zero wall time for byte-reproducible reruns");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate estimates or a baseline");
  std::string eval_dataset = "dataset", eval_est, eval_baseline,
              eval_out = "results.csv";
  eval->add_option("--dataset", eval_dataset, "dataset directory");
  eval->add_option("--est", eval_est, "estimate directory (solver mode)");
  eval->add_option("--baseline", eval_baseline,
                   "baseline kind: I or B (instead of --est)");
  eval->add_option("--out", eval_out, "output CSV path");

  // check
  auto* check = app.add_subcommand(
      "check", "run gradient and formation-equivalence verifiers");
  (void)check;

  CLI11_PARSE(app, argc, argv);

  try {
    fmo::BenchConfig cfg = load_config_or_default(config_path);
    if (seed_flag) {
      cfg.seed = *seed_flag;
      cfg.solver.seed = *seed_flag;
    }
    if (count_flag) cfg.sample_count = *count_flag;

    if (synth->parsed()) {
      fmo::cmd_synth(cfg, synth_out, jobs);
      return 0;
    }
    if (solve->parsed()) {
      auto outcomes = fmo::cmd_solve(solve_dataset, cfg, solve_out, jobs,
                                     !no_timing);
      bool any_failed = false;
      for (const auto& o : outcomes)
        if (!o.ok) {
          any_failed = true;
          std::fprintf(stderr, "failed: %s: %s\n", o.id.c_str(),
                       o.error.c_str());
        }
      return any_failed ? 1 : 0;
    }
    if (eval->parsed()) {
      std::optional<fmo::BaselineKind> baseline;
      if (!eval_baseline.empty()) {
        if (eval_baseline == "I")
          baseline = fmo::BaselineKind::input_I;
        else if (eval_baseline == "B")
          baseline = fmo::BaselineKind::background_B;
        else
          throw fmo::Error("--baseline must be I or B");
      } else if (eval_est.empty()) {
        throw fmo::Error("eval needs --est or --baseline");
      }
      fmo::cmd_eval(eval_dataset, eval_est, baseline, cfg, eval_out, jobs);
      return 0;
    }
    if (check->parsed()) return fmo::cmd_check();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
