#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fmo/energy.hpp"
#include "fmo/formation.hpp"
#include "fmo/image.hpp"

namespace fmo {

struct SolverConfig {
  int n_subframes = 8;
  int max_iters = 500;
  double step = 0.05;
  double momentum = 0.9;
  double rel_tol = 1e-6;
  int patience = 10;
  std::uint64_t seed = 0;
  EnergyWeights weights;

  void validate() const {
    if (n_subframes < 2) throw Error("SolverConfig: n_subframes must be >= 2");
    if (step <= 0.0) throw Error("SolverConfig: step must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
      throw Error("SolverConfig: momentum outside [0,1)");
    if (max_iters < 0 || patience < 1) throw Error("SolverConfig: bad counts");
  }
};

struct SolveResult {
  RenderingStack stack;
  std::vector<EnergyBreakdown> history;  // initial energy, then per iteration
  int iterations_run = 0;
  bool converged = false;
};

/// Difference-image initialization: masks from 3x the max-channel residual
/// |I - B| with small seeded noise to break sub-frame symmetry, appearance
/// copied from the input.
inline RenderingStack init_stack(const Image& I, const Image& B, int n,
                                 std::uint64_t seed) {
  require_same_dims(I, B, "init_stack");
  if (n < 1) throw Error("init_stack: n must be >= 1");
  Image base(I.width, I.height, 1);
  for (int y = 0; y < I.height; ++y)
    for (int x = 0; x < I.width; ++x) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c)
        d = std::max(d, std::abs(I.at(x, y, c) - B.at(x, y, c)));
      base.at(x, y, 0) = std::min(3.0 * d, 1.0);
    }
  std::mt19937_64 rng(seed);
  std::vector<Rendering> renderings;
  renderings.reserve(n);
  for (int i = 0; i < n; ++i) {
    Image m = base;
    for (double& v : m.data) {
      const double u = static_cast<double>(rng()) / 18446744073709551616.0;
      v = std::clamp(v + (u * 2.0 - 1.0) * 0.01, 0.0, 1.0);
    }
    renderings.emplace_back(I, std::move(m));
  }
  return RenderingStack(std::move(renderings));
}

/// Projected gradient descent with momentum on the self-supervised energy.
/// The raw gradient is normalized by its infinity norm before the momentum
/// update, so `step` bounds the per-pixel change per iteration: the losses
/// are means over pixels and sub-frames, which makes the raw gradient scale
/// like 1/(N*w*h) and a fixed unnormalized step size meaningless across
/// resolutions. A step is accepted only if the total does not increase;
/// otherwise the step length halves for that iteration and is restored
/// afterwards.
inline SolveResult solve(const Image& I, const Image& B,
                         const SolverConfig& cfg) {
  require_same_dims(I, B, "solve");
  cfg.validate();

  RenderingStack x = init_stack(I, B, cfg.n_subframes, cfg.seed);
  const std::size_t n = x.size();

  StackGradient v;
  v.dF.assign(n, Image(I.width, I.height, 3));
  v.dM.assign(n, Image(I.width, I.height, 1));

  SolveResult res;
  double energy = energy_total(x, I, B, cfg.weights).total;
  res.history.push_back(energy_total(x, I, B, cfg.weights));

  int stall = 0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    auto [bd, g] = energy_gradient(x, I, B, cfg.weights);
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (double d : g.dF[i].data) gmax = std::max(gmax, std::abs(d));
      for (double d : g.dM[i].data) gmax = std::max(gmax, std::abs(d));
    }
    const double scale = gmax > 0.0 ? 1.0 / gmax : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < v.dF[i].size(); ++p)
        v.dF[i].data[p] =
            cfg.momentum * v.dF[i].data[p] + scale * g.dF[i].data[p];
      for (std::size_t p = 0; p < v.dM[i].size(); ++p)
        v.dM[i].data[p] =
            cfg.momentum * v.dM[i].data[p] + scale * g.dM[i].data[p];
    }

    double step = cfg.step;
    bool accepted = false;
    EnergyBreakdown cand_bd;
    RenderingStack cand = x;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < cand.renderings[i].F.size(); ++p)
          cand.renderings[i].F.data[p] = std::clamp(
              x.renderings[i].F.data[p] - step * v.dF[i].data[p], 0.0, 1.0);
        for (std::size_t p = 0; p < cand.renderings[i].M.size(); ++p)
          cand.renderings[i].M.data[p] = std::clamp(
              x.renderings[i].M.data[p] - step * v.dM[i].data[p], 0.0, 1.0);
      }
      cand_bd = energy_total(cand, I, B, cfg.weights);
      if (cand_bd.total <= energy) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    const double prev = energy;
    if (accepted) {
      x = std::move(cand);
      energy = cand_bd.total;
      res.history.push_back(cand_bd);
    } else {
      res.history.push_back(res.history.back());
    }
    res.iterations_run = iter + 1;

    const double rel = (prev - energy) / std::max(std::abs(prev), 1e-300);
    if (rel < cfg.rel_tol) {
      if (++stall >= cfg.patience) {
        res.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }
  res.stack = std::move(x);
  return res;
}

/// Runs the solver, then composes l exposure-controlled frames from the
/// recovered stack.
inline std::vector<Image> solve_superres(const Image& I, const Image& B,
                                         const SolverConfig& cfg, int l,
                                         double epsilon) {
  SolveResult res = solve(I, B, cfg);
  std::vector<Image> frames;
  frames.reserve(l);
  for (int k = 0; k < l; ++k)
    frames.push_back(compose_exposure(res.stack, B, l, epsilon, k));
  return frames;
}

}  // namespace fmo
