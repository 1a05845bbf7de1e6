#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fmo/formation.hpp"
#include "fmo/image.hpp"

namespace fmo {

/// Loss coefficients of the joint energy. alpha_F weights the supervised
/// appearance term and is only used in oracle mode.
struct EnergyWeights {
  double alpha_I = 1.0;
  double alpha_T = 5.0;
  double alpha_S = 1.0;
  double alpha_F = 1.0;
};

struct EnergyBreakdown {
  double total = 0.0;
  double loss_image = 0.0;
  double loss_time = 0.0;
  double loss_sharp = 0.0;
  std::optional<double> loss_appearance;
};

/// Per-sub-frame gradients with the same dimensions as the stack.
struct StackGradient {
  std::vector<Image> dF;  // 3-channel each
  std::vector<Image> dM;  // 1-channel each
};

enum class TimeDirection { forward, backward };

// ---------------------------------------------------------------------------
// Masked L1

/// Mean L1 distance between A and B over the occupancy mask O (Eq-style:
/// channel differences summed per pixel, normalized by mask-on pixel count).
inline double l1_masked(const Image& A, const Image& B,
                        const Image* O = nullptr) {
  require_same_dims(A, B, "l1_masked");
  if (O) {
    if (O->channels != 1) throw Error("l1_masked: occupancy must be 1-channel");
    if (O->width != A.width || O->height != A.height)
      throw Error("l1_masked: dimension mismatch");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < A.height; ++y)
    for (int x = 0; x < A.width; ++x) {
      if (O && O->at(x, y, 0) == 0.0) continue;
      ++count;
      for (int c = 0; c < A.channels; ++c)
        sum += std::abs(A.at(x, y, c) - B.at(x, y, c));
    }
  if (count == 0) throw Error("l1_masked: empty occupancy");
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Image reconstruction loss (temporal-integration residual)

/// L1 distance between I and the unclamped temporal composite of the stack.
inline double loss_image(const RenderingStack& stack, const Image& I,
                         const Image& B) {
  require_same_dims(I, B, "loss_image");
  Image composite = detail::compose_subframes_raw(stack, B);
  return l1_masked(I, composite);
}

// ---------------------------------------------------------------------------
// Normalized cross-correlation over integer shifts

struct MaxNccResult {
  double value = 0.0;
  int dx = 0;
  int dy = 0;
};

namespace detail {

// Joint 4-channel view of a rendering plus summed-area tables of the
// per-pixel channel sum and channel square sum.
struct NccSignal {
  int w = 0, h = 0;
  std::vector<double> vals;  // 4 per pixel: F rgb then M
  std::vector<double> sat1;  // (w+1)*(h+1)
  std::vector<double> sat2;

  explicit NccSignal(const Rendering& r) : w(r.width()), h(r.height()) {
    vals.resize(static_cast<std::size_t>(w) * h * 4);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double* v = &vals[(static_cast<std::size_t>(y) * w + x) * 4];
        for (int c = 0; c < 3; ++c) v[c] = r.F.at(x, y, c);
        v[3] = r.M.at(x, y, 0);
      }
    sat1.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    sat2.assign(sat1.size(), 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double* v = &vals[(static_cast<std::size_t>(y) * w + x) * 4];
        double s1 = 0.0, s2 = 0.0;
        for (int c = 0; c < 4; ++c) {
          s1 += v[c];
          s2 += v[c] * v[c];
        }
        const std::size_t i = static_cast<std::size_t>(y + 1) * (w + 1) + x + 1;
        sat1[i] = s1 + sat1[i - 1] + sat1[i - (w + 1)] - sat1[i - (w + 1) - 1];
        sat2[i] = s2 + sat2[i - 1] + sat2[i - (w + 1)] - sat2[i - (w + 1) - 1];
      }
  }

  double rect1(int x0, int y0, int x1, int y1) const {  // half-open
    return sat1[static_cast<std::size_t>(y1) * (w + 1) + x1] -
           sat1[static_cast<std::size_t>(y0) * (w + 1) + x1] -
           sat1[static_cast<std::size_t>(y1) * (w + 1) + x0] +
           sat1[static_cast<std::size_t>(y0) * (w + 1) + x0];
  }
  double rect2(int x0, int y0, int x1, int y1) const {
    return sat2[static_cast<std::size_t>(y1) * (w + 1) + x1] -
           sat2[static_cast<std::size_t>(y0) * (w + 1) + x1] -
           sat2[static_cast<std::size_t>(y1) * (w + 1) + x0] +
           sat2[static_cast<std::size_t>(y0) * (w + 1) + x0];
  }
};

struct NccShiftStats {
  double value = 0.0;
  bool degenerate = false;
  // overlap rectangle in A coordinates, half-open
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // unnormalized sums of squared deviations
  std::size_t n = 0;
};

// Zero-normalized cross-correlation of A(p) against B(p + shift) over the
// overlapping region, the two signals treated as single 4-channel templates.
inline NccShiftStats ncc_at_shift(const NccSignal& A, const NccSignal& B,
                                  int dx, int dy) {
  NccShiftStats st;
  st.x0 = std::max(0, -dx);
  st.x1 = std::min(A.w, B.w - dx);
  st.y0 = std::max(0, -dy);
  st.y1 = std::min(A.h, B.h - dy);
  if (st.x0 >= st.x1 || st.y0 >= st.y1) {
    st.degenerate = true;
    return st;
  }
  st.n = static_cast<std::size_t>(st.x1 - st.x0) * (st.y1 - st.y0) * 4;
  const double n = static_cast<double>(st.n);

  const double sa = A.rect1(st.x0, st.y0, st.x1, st.y1);
  const double sa2 = A.rect2(st.x0, st.y0, st.x1, st.y1);
  const double sb = B.rect1(st.x0 + dx, st.y0 + dy, st.x1 + dx, st.y1 + dy);
  const double sb2 = B.rect2(st.x0 + dx, st.y0 + dy, st.x1 + dx, st.y1 + dy);

  double cross = 0.0;
  for (int y = st.y0; y < st.y1; ++y) {
    const double* pa = &A.vals[(static_cast<std::size_t>(y) * A.w + st.x0) * 4];
    const double* pb =
        &B.vals[(static_cast<std::size_t>(y + dy) * B.w + st.x0 + dx) * 4];
    const std::size_t len = static_cast<std::size_t>(st.x1 - st.x0) * 4;
    for (std::size_t i = 0; i < len; ++i) cross += pa[i] * pb[i];
  }

  st.mean_a = sa / n;
  st.mean_b = sb / n;
  st.var_a = std::max(0.0, sa2 - sa * sa / n);
  st.var_b = std::max(0.0, sb2 - sb * sb / n);

  const bool deg_a = st.var_a / n < 1e-12;
  const bool deg_b = st.var_b / n < 1e-12;
  if (deg_a && deg_b) {
    st.degenerate = true;
    st.value = std::abs(st.mean_a - st.mean_b) < 1e-9 ? 1.0 : 0.0;
    return st;
  }
  if (deg_a || deg_b) {
    st.degenerate = true;
    st.value = 0.0;
    return st;
  }
  st.value = (cross - sa * sb / n) / std::sqrt(st.var_a * st.var_b);
  st.value = std::clamp(st.value, -1.0, 1.0);
  return st;
}

inline std::vector<std::pair<int, int>> ncc_shifts(int w, int h,
                                                   double pad_fraction) {
  const int mx = static_cast<int>(std::ceil(pad_fraction * w));
  const int my = static_cast<int>(std::ceil(pad_fraction * h));
  std::vector<std::pair<int, int>> shifts;
  shifts.reserve(static_cast<std::size_t>(2 * mx + 1) * (2 * my + 1));
  for (int dy = -my; dy <= my; ++dy)
    for (int dx = -mx; dx <= mx; ++dx) shifts.emplace_back(dx, dy);
  std::sort(shifts.begin(), shifts.end(), [](auto a, auto b) {
    const long ra = static_cast<long>(a.first) * a.first +
                    static_cast<long>(a.second) * a.second;
    const long rb = static_cast<long>(b.first) * b.first +
                    static_cast<long>(b.second) * b.second;
    if (ra != rb) return ra < rb;
    return a < b;
  });
  return shifts;
}

inline MaxNccResult maxncc_impl(const NccSignal& A, const NccSignal& B,
                                double pad_fraction) {
  MaxNccResult best;
  bool have = false;
  for (auto [dx, dy] : ncc_shifts(A.w, A.h, pad_fraction)) {
    NccShiftStats st = ncc_at_shift(A, B, dx, dy);
    if (!have || st.value > best.value) {
      best = {st.value, dx, dy};
      have = true;
    }
  }
  return best;
}

}  // namespace detail

/// Maximum zero-normalized cross-correlation of R_a against integer-shifted
/// R_b, searched over |dx| <= ceil(pad*w), |dy| <= ceil(pad*h). Ties resolve
/// to the smallest |shift|, then lexicographically.
inline MaxNccResult maxncc(const Rendering& R_a, const Rendering& R_b,
                           double pad_fraction = 0.10) {
  if (R_a.width() != R_b.width() || R_a.height() != R_b.height())
    throw Error("maxncc: dimension mismatch");
  detail::NccSignal A(R_a), B(R_b);
  return detail::maxncc_impl(A, B, pad_fraction);
}

// ---------------------------------------------------------------------------
// Time-consistency loss

inline double loss_time(const RenderingStack& stack,
                        double pad_fraction = 0.10) {
  const std::size_t n = stack.size();
  if (n < 2) throw Error("loss_time: time consistency undefined");
  std::vector<detail::NccSignal> sig;
  sig.reserve(n);
  for (const Rendering& r : stack.renderings) sig.emplace_back(r);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    sum += detail::maxncc_impl(sig[i], sig[i + 1], pad_fraction).value;
  return 1.0 - sum / static_cast<double>(n - 1);
}

// ---------------------------------------------------------------------------
// Sharpness loss (mean per-pixel binary entropy of the masks)

namespace detail {

constexpr double kEntropyClamp = 1e-4;

inline double binary_entropy(double m) {
  if (m <= 0.0 || m >= 1.0) return 0.0;
  m = std::clamp(m, kEntropyClamp, 1.0 - kEntropyClamp);
  return -m * std::log(m) - (1.0 - m) * std::log(1.0 - m);
}

inline double binary_entropy_grad(double m) {
  if (m < kEntropyClamp || m > 1.0 - kEntropyClamp) return 0.0;
  return -std::log(m / (1.0 - m));
}

}  // namespace detail

inline double loss_sharp(const RenderingStack& stack) {
  double sum = 0.0;
  for (const Rendering& r : stack.renderings)
    for (double m : r.M.data) sum += detail::binary_entropy(m);
  return sum / (static_cast<double>(stack.size()) *
                static_cast<double>(stack.renderings.front().M.pixel_count()));
}

// ---------------------------------------------------------------------------
// Supervised appearance loss with time-direction minimum

struct AppearanceLoss {
  double value = 0.0;
  TimeDirection direction = TimeDirection::forward;
  bool empty_gt_subframe = false;  // some sub-frame had no GT support
};

namespace detail {

struct PairLoss {
  double value = 0.0;
  bool empty_region = false;
};

inline PairLoss rendering_loss(const Rendering& est, const Rendering& gt,
                               double thr) {
  const int w = gt.width(), h = gt.height();
  Image in(w, h, 1), out(w, h, 1);
  std::size_t n_in = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool inside = gt.M.at(x, y, 0) > thr;
      in.at(x, y, 0) = inside ? 1.0 : 0.0;
      out.at(x, y, 0) = inside ? 0.0 : 1.0;
      if (inside) ++n_in;
    }
  PairLoss pl;
  const std::size_t n_total = static_cast<std::size_t>(w) * h;
  if (n_in > 0) {
    pl.value += l1_masked(est.M, gt.M, &in);
    Image est_fm(w, h, 3), gt_fm(w, h, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) {
          est_fm.at(x, y, c) = est.F.at(x, y, c) * est.M.at(x, y, 0);
          gt_fm.at(x, y, c) = gt.F.at(x, y, c) * gt.M.at(x, y, 0);
        }
    pl.value += l1_masked(est_fm, gt_fm, &in);
  } else {
    pl.empty_region = true;
  }
  if (n_in < n_total) pl.value += l1_masked(est.M, gt.M, &out);
  return pl;
}

}  // namespace detail

/// Eq-style supervised loss: evaluated for the forward (i <-> i) and
/// backward (i <-> N-1-i) pairings, reporting the smaller one.
inline AppearanceLoss loss_appearance(const RenderingStack& est,
                                      const RenderingStack& gt,
                                      double gt_threshold = 0.0) {
  if (est.size() != gt.size()) throw Error("loss_appearance: stack size mismatch");
  if (est.width() != gt.width() || est.height() != gt.height())
    throw Error("loss_appearance: dimension mismatch");
  const std::size_t n = est.size();
  double fwd = 0.0, bwd = 0.0;
  bool empty = false;
  for (std::size_t i = 0; i < n; ++i) {
    auto pf = detail::rendering_loss(est.renderings[i], gt.renderings[i],
                                     gt_threshold);
    auto pb = detail::rendering_loss(est.renderings[i],
                                     gt.renderings[n - 1 - i], gt_threshold);
    fwd += pf.value;
    bwd += pb.value;
    empty = empty || pf.empty_region || pb.empty_region;
  }
  fwd /= static_cast<double>(n);
  bwd /= static_cast<double>(n);
  AppearanceLoss out;
  out.empty_gt_subframe = empty;
  if (bwd < fwd) {
    out.value = bwd;
    out.direction = TimeDirection::backward;
  } else {
    out.value = fwd;
    out.direction = TimeDirection::forward;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joint energy

inline EnergyBreakdown energy_total(const RenderingStack& stack, const Image& I,
                                    const Image& B, const EnergyWeights& w,
                                    const RenderingStack* oracle_gt = nullptr,
                                    double gt_threshold = 0.0) {
  EnergyBreakdown bd;
  bd.loss_image = loss_image(stack, I, B);
  if (stack.size() >= 2)
    bd.loss_time = loss_time(stack);
  else if (w.alpha_T != 0.0)
    throw Error("energy_total: time consistency undefined");
  bd.loss_sharp = loss_sharp(stack);
  bd.total = w.alpha_I * bd.loss_image + w.alpha_T * bd.loss_time +
             w.alpha_S * bd.loss_sharp;
  if (oracle_gt) {
    bd.loss_appearance = loss_appearance(stack, *oracle_gt, gt_threshold).value;
    bd.total += w.alpha_F * *bd.loss_appearance;
  }
  return bd;
}

/// Analytic gradient of the self-supervised energy (image, time, sharpness
/// terms) with respect to every F and M value. The best NCC shift is held
/// fixed, i.e. the subgradient at the argmax; L1 subgradients use sign(0)=0.
inline std::pair<EnergyBreakdown, StackGradient> energy_gradient(
    const RenderingStack& stack, const Image& I, const Image& B,
    const EnergyWeights& w) {
  const std::size_t n = stack.size();
  const int width = stack.width(), height = stack.height();
  const double npix = static_cast<double>(stack.renderings.front().M.pixel_count());

  StackGradient g;
  g.dF.assign(n, Image(width, height, 3));
  g.dM.assign(n, Image(width, height, 1));

  EnergyBreakdown bd;

  // Image reconstruction term.
  {
    Image composite = detail::compose_subframes_raw(stack, B);
    bd.loss_image = l1_masked(I, composite);
    const double scale = w.alpha_I / (static_cast<double>(n) * npix);
    if (w.alpha_I != 0.0) {
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          double sgn[3];
          for (int c = 0; c < 3; ++c) {
            const double r = composite.at(x, y, c) - I.at(x, y, c);
            sgn[c] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
          }
          for (std::size_t i = 0; i < n; ++i) {
            const Rendering& ri = stack.renderings[i];
            const double m = ri.M.at(x, y, 0);
            double dm = 0.0;
            for (int c = 0; c < 3; ++c) {
              g.dF[i].at(x, y, c) += scale * sgn[c] * m;
              dm += sgn[c] * (ri.F.at(x, y, c) - B.at(x, y, c));
            }
            g.dM[i].at(x, y, 0) += scale * dm;
          }
        }
    }
  }

  // Time-consistency term.
  if (n >= 2) {
    std::vector<detail::NccSignal> sig;
    sig.reserve(n);
    for (const Rendering& r : stack.renderings) sig.emplace_back(r);
    double ncc_sum = 0.0;
    const double scale = w.alpha_T / static_cast<double>(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      MaxNccResult best = detail::maxncc_impl(sig[i], sig[i + 1], 0.10);
      ncc_sum += best.value;
      if (w.alpha_T == 0.0) continue;
      detail::NccShiftStats st =
          detail::ncc_at_shift(sig[i], sig[i + 1], best.dx, best.dy);
      if (st.degenerate) continue;
      const double inv_sab = 1.0 / std::sqrt(st.var_a * st.var_b);
      const double inv_sa2 = 1.0 / st.var_a;
      const double inv_sb2 = 1.0 / st.var_b;
      for (int y = st.y0; y < st.y1; ++y)
        for (int x = st.x0; x < st.x1; ++x) {
          const double* va =
              &sig[i].vals[(static_cast<std::size_t>(y) * width + x) * 4];
          const double* vb =
              &sig[i + 1].vals[(static_cast<std::size_t>(y + best.dy) * width +
                                x + best.dx) * 4];
          for (int c = 0; c < 4; ++c) {
            const double ah = va[c] - st.mean_a;
            const double bh = vb[c] - st.mean_b;
            // d ncc / d a, d ncc / d b; loss contributes -ncc
            const double da = bh * inv_sab - st.value * ah * inv_sa2;
            const double db = ah * inv_sab - st.value * bh * inv_sb2;
            if (c < 3) {
              g.dF[i].at(x, y, c) -= scale * da;
              g.dF[i + 1].at(x + best.dx, y + best.dy, c) -= scale * db;
            } else {
              g.dM[i].at(x, y, 0) -= scale * da;
              g.dM[i + 1].at(x + best.dx, y + best.dy, 0) -= scale * db;
            }
          }
        }
    }
    bd.loss_time = 1.0 - ncc_sum / static_cast<double>(n - 1);
  } else if (w.alpha_T != 0.0) {
    throw Error("energy_gradient: time consistency undefined");
  }

  // Sharpness term.
  {
    double sum = 0.0;
    const double scale = w.alpha_S / (static_cast<double>(n) * npix);
    for (std::size_t i = 0; i < n; ++i) {
      const Image& m = stack.renderings[i].M;
      for (std::size_t p = 0; p < m.size(); ++p) {
        sum += detail::binary_entropy(m.data[p]);
        if (w.alpha_S != 0.0)
          g.dM[i].data[p] += scale * detail::binary_entropy_grad(m.data[p]);
      }
    }
    bd.loss_sharp = sum / (static_cast<double>(n) * npix);
  }

  bd.total = w.alpha_I * bd.loss_image + w.alpha_T * bd.loss_time +
             w.alpha_S * bd.loss_sharp;
  return {bd, g};
}

}  // namespace fmo
