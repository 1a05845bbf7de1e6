#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fmo/dataset.hpp"
#include "fmo/gradcheck.hpp"
#include "fmo/metrics.hpp"
#include "fmo/solver.hpp"
#include "fmo/synth.hpp"

namespace fmo {

// ---------------------------------------------------------------------------
// Logging (FMO_LOG in {error, warn, info, debug}; default warn)

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FMO_LOG");
    if (!env) return LogLevel::warn;
    const std::string s(env);
    if (s == "error") return LogLevel::error;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

template <typename... Args>
inline void log(LogLevel lvl, const char* fmt, Args... args) {
  if (lvl > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] ", names[static_cast<int>(lvl)]);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

// ---------------------------------------------------------------------------
// Configuration

struct EvalConfig {
  int l = 8;
  double epsilon = 1.0;
};

struct BenchConfig {
  int canvas_w = 64;
  int canvas_h = 64;
  int n_gt = 24;
  int sample_count = 1;
  std::uint64_t seed = 0;
  SolverConfig solver;
  EvalConfig eval;
};

namespace detail {

inline void reject_unknown_keys(const json& j,
                                std::initializer_list<const char*> allowed,
                                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw Error(std::string("config: unknown key '") + it.key() + "' in " +
                  where);
  }
}

}  // namespace detail

inline BenchConfig parse_bench_config(const json& j) {
  detail::reject_unknown_keys(
      j, {"version", "canvas", "n_gt", "samples", "seed", "solver", "eval"},
      "top level");
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw Error("config: missing or unsupported version");
  BenchConfig cfg;
  if (j.contains("canvas")) {
    cfg.canvas_w = j.at("canvas").at(0).get<int>();
    cfg.canvas_h = j.at("canvas").at(1).get<int>();
  }
  if (j.contains("n_gt")) cfg.n_gt = j.at("n_gt").get<int>();
  if (j.contains("samples")) cfg.sample_count = j.at("samples").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    detail::reject_unknown_keys(s,
                                {"n_subframes", "max_iters", "step", "momentum",
                                 "rel_tol", "patience", "seed", "weights"},
                                "solver");
    if (s.contains("n_subframes"))
      cfg.solver.n_subframes = s.at("n_subframes").get<int>();
    if (s.contains("max_iters")) cfg.solver.max_iters = s.at("max_iters").get<int>();
    if (s.contains("step")) cfg.solver.step = s.at("step").get<double>();
    if (s.contains("momentum")) cfg.solver.momentum = s.at("momentum").get<double>();
    if (s.contains("rel_tol")) cfg.solver.rel_tol = s.at("rel_tol").get<double>();
    if (s.contains("patience")) cfg.solver.patience = s.at("patience").get<int>();
    if (s.contains("seed")) cfg.solver.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("weights")) {
      const json& w = s.at("weights");
      detail::reject_unknown_keys(w, {"alpha_I", "alpha_T", "alpha_S", "alpha_F"},
                                  "weights");
      if (w.contains("alpha_I")) cfg.solver.weights.alpha_I = w.at("alpha_I").get<double>();
      if (w.contains("alpha_T")) cfg.solver.weights.alpha_T = w.at("alpha_T").get<double>();
      if (w.contains("alpha_S")) cfg.solver.weights.alpha_S = w.at("alpha_S").get<double>();
      if (w.contains("alpha_F")) cfg.solver.weights.alpha_F = w.at("alpha_F").get<double>();
    }
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    detail::reject_unknown_keys(e, {"l", "epsilon"}, "eval");
    if (e.contains("l")) cfg.eval.l = e.at("l").get<int>();
    if (e.contains("epsilon")) cfg.eval.epsilon = e.at("epsilon").get<double>();
  }
  if (cfg.canvas_w < 1 || cfg.canvas_h < 1 || cfg.n_gt < 1 ||
      cfg.sample_count < 0 || cfg.eval.l < 1)
    throw Error("config: counts must be >= 1");
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config: malformed JSON in " + path + ": " + e.what());
  }
  return parse_bench_config(j);
}

// ---------------------------------------------------------------------------
// Worker pool: deterministic output order regardless of scheduling.

template <typename Fn>
inline void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int width = std::min<std::size_t>(jobs, count);
  for (int t = 0; t < width; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        fn(i);
    });
  for (std::thread& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Per-sample seed derivation (splitmix64 over the master seed and index)

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// synth: generate and write a dataset

inline void cmd_synth(const BenchConfig& cfg, const std::string& out_dir,
                      int jobs = 1) {
  std::vector<SynthSample> samples(cfg.sample_count);
  parallel_for(cfg.sample_count, jobs, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    SynthSample s = sample_scene(seed, cfg.canvas_w, cfg.canvas_h, cfg.n_gt);
    char id[32];
    std::snprintf(id, sizeof(id), "sample_%04zu", i);
    s.id = id;
    samples[i] = std::move(s);
    log(LogLevel::info, "synth %s (seed %llu)", id,
        static_cast<unsigned long long>(seed));
  });
  write_dataset(samples, out_dir);
}

// ---------------------------------------------------------------------------
// solve: run the solver on every sample of a dataset

struct SolveOutcome {
  std::string id;
  bool ok = false;
  std::string error;
};

/// Writes per sample: est/F_%02d.png, est/M_%02d.png, history.csv and
/// solve.json. Per-sample failures are recorded and the run continues;
/// returns the outcomes in manifest order. With `record_timing` off the
/// metadata carries a zero wall time so reruns are byte-reproducible.
inline std::vector<SolveOutcome> cmd_solve(const std::string& dataset_dir,
                                           const BenchConfig& cfg,
                                           const std::string& out_dir,
                                           int jobs = 1,
                                           bool record_timing = true) {
  const std::vector<SynthSample> samples = read_dataset(dataset_dir);
  std::vector<SolveOutcome> outcomes(samples.size());
  fs::create_directories(out_dir);
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const SynthSample& s = samples[i];
    SolveOutcome& out = outcomes[i];
    out.id = s.id;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      SolverConfig scfg = cfg.solver;
      scfg.seed = derive_seed(cfg.solver.seed, i);
      SolveResult res = solve(s.I, s.B, scfg);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();

      const fs::path sdir = fs::path(out_dir) / s.id;
      fs::create_directories(sdir / "est");
      for (std::size_t k = 0; k < res.stack.size(); ++k) {
        save_png(res.stack.renderings[k].F,
                 (sdir / "est" / detail::frame_name("F", static_cast<int>(k))).string());
        save_png(res.stack.renderings[k].M,
                 (sdir / "est" / detail::frame_name("M", static_cast<int>(k))).string(),
                 16);
      }
      std::ofstream hist(sdir / "history.csv");
      hist << "iter,total,loss_image,loss_time,loss_sharp\n";
      char buf[160];
      for (std::size_t it = 0; it < res.history.size(); ++it) {
        const EnergyBreakdown& bd = res.history[it];
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g\n", it,
                      bd.total, bd.loss_image, bd.loss_time, bd.loss_sharp);
        hist << buf;
      }
      json meta;
      meta["id"] = s.id;
      meta["seed"] = scfg.seed;
      meta["iterations_run"] = res.iterations_run;
      meta["converged"] = res.converged;
      meta["wall_time_s"] = record_timing ? wall : 0.0;
      std::ofstream mf(sdir / "solve.json");
      mf << meta.dump(2) << "\n";
      out.ok = true;
      log(LogLevel::info, "solve %s: %d iters, converged=%d", s.id.c_str(),
          res.iterations_run, res.converged ? 1 : 0);
    } catch (const std::exception& e) {
      out.error = e.what();
      log(LogLevel::error, "solve %s failed: %s", s.id.c_str(), e.what());
    }
  });
  return outcomes;
}

// ---------------------------------------------------------------------------
// eval: score estimates (or a baseline) against a dataset

struct ResultRow {
  std::string id;
  std::string method;  // solver, baseline-I, baseline-B
  std::optional<double> psnr_db;
  std::optional<double> ssim;
  std::optional<double> tiou;
  std::optional<TimeDirection> direction;
  std::optional<double> wall_time_s;
};

namespace detail {

inline std::string csv_field(const std::optional<double>& v, const char* fmt) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

inline void write_rows_csv(const std::vector<ResultRow>& rows,
                           const std::string& out_csv) {
  std::ofstream out(out_csv);
  out << "id,method,psnr_db,ssim,tiou,direction,wall_time_s\n";
  for (const ResultRow& r : rows) {
    out << r.id << ',' << r.method << ',' << csv_field(r.psnr_db, "%.6f") << ','
        << csv_field(r.ssim, "%.6f") << ',' << csv_field(r.tiou, "%.6f") << ','
        << (r.direction
                ? (*r.direction == TimeDirection::forward ? "forward"
                                                          : "backward")
                : "")
        << ',' << csv_field(r.wall_time_s, "%.3f") << '\n';
  }
}

inline ResultRow mean_row(const std::vector<ResultRow>& rows,
                          const std::string& method) {
  ResultRow mean;
  mean.id = "MEAN";
  mean.method = method;
  auto aggregate = [&](auto getter) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const ResultRow& r : rows) {
      const std::optional<double> v = getter(r);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  mean.psnr_db = aggregate([](const ResultRow& r) { return r.psnr_db; });
  mean.ssim = aggregate([](const ResultRow& r) { return r.ssim; });
  mean.tiou = aggregate([](const ResultRow& r) { return r.tiou; });
  mean.wall_time_s = aggregate([](const ResultRow& r) { return r.wall_time_s; });
  return mean;
}

inline RenderingStack load_est_stack(const fs::path& sdir, int n) {
  std::vector<Rendering> rs;
  for (int k = 0; k < n; ++k) {
    const fs::path fp = sdir / "est" / frame_name("F", k);
    const fs::path mp = sdir / "est" / frame_name("M", k);
    if (!fs::exists(fp) || !fs::exists(mp))
      throw Error("eval: missing estimate frame " + fp.string());
    rs.emplace_back(load_png(fp.string()), load_png(mp.string()));
  }
  return RenderingStack(std::move(rs));
}

}  // namespace detail

/// Scores every sample. `est_dir` empty means baseline mode, in which case
/// `baseline` selects the input-I or background-B prediction.
inline std::vector<ResultRow> cmd_eval(
    const std::string& dataset_dir, const std::string& est_dir,
    std::optional<BaselineKind> baseline, const BenchConfig& cfg,
    const std::string& out_csv, int jobs = 1) {
  const std::vector<SynthSample> samples = read_dataset(dataset_dir);
  const std::string method =
      baseline ? (*baseline == BaselineKind::input_I ? "baseline-I"
                                                     : "baseline-B")
               : "solver";
  std::vector<ResultRow> rows(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const SynthSample& s = samples[i];
    ResultRow& row = rows[i];
    row.id = s.id;
    row.method = method;
    try {
      EvalReport rep;
      if (baseline) {
        rep = baseline_report(s, *baseline, cfg.eval.l, cfg.eval.epsilon);
        row.wall_time_s = 0.0;
      } else {
        const fs::path sdir = fs::path(est_dir) / s.id;
        RenderingStack est =
            detail::load_est_stack(sdir, cfg.solver.n_subframes);
        rep = evaluate(est, s, cfg.eval.l, cfg.eval.epsilon);
        row.wall_time_s = 0.0;
        const fs::path meta = sdir / "solve.json";
        if (fs::exists(meta)) {
          std::ifstream mf(meta);
          json m;
          mf >> m;
          row.wall_time_s = m.value("wall_time_s", 0.0);
        }
      }
      row.psnr_db = rep.psnr_db;
      row.ssim = rep.ssim;
      row.tiou = rep.tiou;
      row.direction = rep.direction;
    } catch (const std::exception& e) {
      log(LogLevel::warn, "eval %s: %s", s.id.c_str(), e.what());
    }
  });
  std::vector<ResultRow> all = rows;
  all.push_back(detail::mean_row(rows, method));
  detail::write_rows_csv(all, out_csv);
  return all;
}

// ---------------------------------------------------------------------------
// check: self-verification suites

struct CheckResult {
  std::string family;
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> results;
  char buf[160];

  // 1. gradient correctness (analytic vs finite differences)
  for (int i = 0; i < 3; ++i) {
    RandomScene sc = random_scene(12, 12, 3, 900 + i);
    GradCheckReport rep = gradient_check(sc.stack, sc.I, sc.B, EnergyWeights{});
    std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-3)",
                  rep.max_rel_error);
    results.push_back({"gradients", "finite-difference seed " + std::to_string(i),
                       rep.max_rel_error <= 1e-3, buf});
  }

  // 2. blatting equivalence (integer-translated constant object)
  for (int i = 0; i < 3; ++i) {
    std::mt19937_64 rng(7100 + i);
    const int w = 32, h = 32, n = 5;
    ObjectSpec obj;
    obj.shape = ShapeKind::disc;
    obj.size = 4.0;
    obj.texture = TextureKind::uniform;
    for (double& c : obj.color1) c = detail::uniform01(rng);
    Rendering base = rasterize_object(obj, Pose{10.5, 10.5, 1.0, 0.0}, w, h);
    Image F_pre(w, h, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          F_pre.at(x, y, c) = base.F.at(x, y, c) * base.M.at(x, y, 0);
    std::vector<Rendering> rs;
    BlurKernel H;
    for (int k = 0; k < n; ++k) {
      const int ddx = k * (1 + i % 2), ddy = k;
      Image F(w, h, 3), M(w, h, 1);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int sx = x - ddx, sy = y - ddy;
          if (sx < 0 || sy < 0) continue;
          M.at(x, y, 0) = base.M.at(sx, sy, 0);
          for (int c = 0; c < 3; ++c) F.at(x, y, c) = base.F.at(sx, sy, c);
        }
      rs.emplace_back(std::move(F), std::move(M));
      H.taps.push_back({ddx, ddy, 1.0 / n});
    }
    Image bg(w, h, 3);
    for (double& v : bg.data) v = detail::uniform01(rng);
    Image via_stack = compose_subframes(RenderingStack(std::move(rs)), bg);
    Image via_blatting = compose_blatting(F_pre, base.M, H, bg);
    double max_err = 0.0;
    for (std::size_t p = 0; p < via_stack.size(); ++p)
      max_err = std::max(max_err,
                         std::abs(via_stack.data[p] - via_blatting.data[p]));
    std::snprintf(buf, sizeof(buf), "max abs err %.3e (tol 1e-9)", max_err);
    results.push_back({"blatting-equivalence", "constant object seed " +
                       std::to_string(i), max_err <= 1e-9, buf});
  }

  // 3. metric oracles (closed forms)
  {
    Image a(16, 16, 3, 0.4), b(16, 16, 3, 0.5);
    const double p = psnr(a, b);
    std::snprintf(buf, sizeof(buf), "psnr %.9f (expect 20)", p);
    results.push_back({"metric-oracles", "psnr uniform diff 0.1",
                       std::abs(p - 20.0) <= 1e-9, buf});
    Image z(16, 16, 3, 0.0), o(16, 16, 3, 1.0);
    const double C1 = 1e-4;
    const double s = ssim(z, o);
    std::snprintf(buf, sizeof(buf), "ssim %.9e (expect %.9e)", s, C1 / (1 + C1));
    results.push_back({"metric-oracles", "ssim constant closed form",
                       std::abs(s - C1 / (1 + C1)) <= 1e-12, buf});
    const double iou0 = disc_iou(0.0, 3.0), iou2 = disc_iou(6.0, 3.0);
    results.push_back({"metric-oracles", "disc iou endpoints",
                       iou0 == 1.0 && iou2 == 0.0, "coincident 1, disjoint 0"});
  }

  // 4. time-reversal invariance of the losses
  for (int i = 0; i < 3; ++i) {
    RandomScene sc = random_scene(14, 14, 4, 7200 + i);
    RenderingStack rev = reverse(sc.stack);
    const double dt = std::abs(loss_time(sc.stack) - loss_time(rev));
    const double ds = std::abs(loss_sharp(sc.stack) - loss_sharp(rev));
    const double di =
        std::abs(loss_image(sc.stack, sc.I, sc.B) - loss_image(rev, sc.I, sc.B));
    const bool ok = dt <= 1e-12 && ds <= 1e-12 && di <= 1e-12;
    std::snprintf(buf, sizeof(buf), "dT %.1e dS %.1e dI %.1e", dt, ds, di);
    results.push_back({"reversal-invariance", "losses seed " + std::to_string(i),
                       ok, buf});
  }

  return results;
}

inline int cmd_check() {
  const std::vector<CheckResult> results = run_checks();
  bool all = true;
  for (const CheckResult& r : results) {
    std::printf("%s %s / %s: %s\n", r.pass ? "PASS" : "FAIL", r.family.c_str(),
                r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace fmo
