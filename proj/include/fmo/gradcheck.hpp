#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fmo/energy.hpp"
#include "fmo/image.hpp"

namespace fmo {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
};

/// Compares an analytic stack gradient against central finite differences.
/// Coordinates within `kink_tol` of an L1 kink of the image term or of the
/// entropy clamp band are excluded; both are genuine non-smooth points.
/// `grad_fn` defaults to energy_gradient and is injectable so a corrupted
/// gradient can be used as a negative control.
inline GradCheckReport gradient_check(
    const RenderingStack& stack, const Image& I, const Image& B,
    const EnergyWeights& w, double h = 1e-4, double kink_tol = 1e-3,
    const std::function<std::pair<EnergyBreakdown, StackGradient>(
        const RenderingStack&, const Image&, const Image&,
        const EnergyWeights&)>& grad_fn = {}) {
  auto gfn = grad_fn ? grad_fn
                     : [](const RenderingStack& s, const Image& i,
                          const Image& b, const EnergyWeights& ww) {
                         return energy_gradient(s, i, b, ww);
                       };
  auto [bd, g] = gfn(stack, I, B, w);
  Image residual = detail::compose_subframes_raw(stack, B);
  for (std::size_t p = 0; p < residual.size(); ++p)
    residual.data[p] -= I.data[p];

  GradCheckReport rep;
  RenderingStack pert = stack;
  const std::size_t n = stack.size();
  auto fd_at = [&](Image& img, std::size_t p) {
    const double orig = img.data[p];
    img.data[p] = orig + h;
    const double ep = energy_total(pert, I, B, w).total;
    img.data[p] = orig - h;
    const double em = energy_total(pert, I, B, w).total;
    img.data[p] = orig;
    return (ep - em) / (2.0 * h);
  };
  auto record = [&](double analytic, double fd) {
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-7});
    const double rel = std::abs(analytic - fd) / denom;
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
    ++rep.checked;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const Image& F = stack.renderings[i].F;
    const Image& M = stack.renderings[i].M;
    for (int y = 0; y < F.height; ++y)
      for (int x = 0; x < F.width; ++x) {
        bool near_kink = false;
        for (int c = 0; c < 3; ++c)
          near_kink = near_kink ||
                      std::abs(residual.at(x, y, c)) < kink_tol;
        // F coordinates
        for (int c = 0; c < 3; ++c) {
          const std::size_t p =
              (static_cast<std::size_t>(y) * F.width + x) * 3 + c;
          if (std::abs(residual.at(x, y, c)) < kink_tol) {
            ++rep.excluded;
            continue;
          }
          record(g.dF[i].data[p], fd_at(pert.renderings[i].F, p));
        }
        // M coordinate
        const std::size_t p = static_cast<std::size_t>(y) * M.width + x;
        const double m = M.data[p];
        const bool near_clamp = m < detail::kEntropyClamp + kink_tol ||
                                m > 1.0 - detail::kEntropyClamp - kink_tol;
        if (near_kink || near_clamp) {
          ++rep.excluded;
          continue;
        }
        record(g.dM[i].data[p], fd_at(pert.renderings[i].M, p));
      }
  }
  return rep;
}

/// Deterministic random stack/background/input fixture used by the
/// verification suites.
struct RandomScene {
  RenderingStack stack;
  Image I;
  Image B;
};

inline RandomScene random_scene(int w, int h, int n, std::uint64_t seed,
                                double mask_lo = 0.05, double mask_hi = 0.95) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) / 18446744073709551616.0);
  };
  std::vector<Rendering> rs;
  for (int i = 0; i < n; ++i) {
    Image F(w, h, 3), M(w, h, 1);
    for (double& v : F.data) v = uni(0.0, 1.0);
    for (double& v : M.data) v = uni(mask_lo, mask_hi);
    rs.emplace_back(std::move(F), std::move(M));
  }
  RandomScene sc;
  sc.stack = RenderingStack(std::move(rs));
  sc.B = Image(w, h, 3);
  for (double& v : sc.B.data) v = uni(0.0, 1.0);
  sc.I = Image(w, h, 3);
  for (double& v : sc.I.data) v = uni(0.0, 1.0);
  return sc;
}

}  // namespace fmo
