#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "fmo/energy.hpp"
#include "fmo/formation.hpp"
#include "fmo/image.hpp"
#include "fmo/synth.hpp"
#include "fmo/trajectory.hpp"

namespace fmo {

inline constexpr double kPsnrCap = 100.0;

/// Peak signal-to-noise ratio in dB over all pixels and channels,
/// capped at 100 dB.
inline double psnr(const Image& A, const Image& B) {
  require_same_dims(A, B, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double d = A.data[i] - B.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(A.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

inline const std::array<double, 11>& ssim_window_1d() {
  static const std::array<double, 11> w = [] {
    std::array<double, 11> g{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
      const double d = i - 5;
      g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

}  // namespace detail

/// Windowed SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2 at dynamic range 1, per channel, mean over valid window
/// centers then over channels.
inline double ssim(const Image& A, const Image& B) {
  require_same_dims(A, B, "ssim");
  if (A.width < 11 || A.height < 11)
    throw Error("ssim: image smaller than 11x11 window");
  const auto& w1 = detail::ssim_window_1d();
  const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;

  double total = 0.0;
  std::size_t count = 0;
  for (int cy = 5; cy < A.height - 5; ++cy)
    for (int cx = 5; cx < A.width - 5; ++cx)
      for (int ch = 0; ch < A.channels; ++ch) {
        double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int j = -5; j <= 5; ++j)
          for (int i = -5; i <= 5; ++i) {
            const double w = w1[j + 5] * w1[i + 5];
            const double a = A.at(cx + i, cy + j, ch);
            const double b = B.at(cx + i, cy + j, ch);
            ma += w * a;
            mb += w * b;
            saa += w * a * a;
            sbb += w * b * b;
            sab += w * a * b;
          }
        const double va = saa - ma * ma;
        const double vb = sbb - mb * mb;
        const double cov = sab - ma * mb;
        total += ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) /
                 ((ma * ma + mb * mb + C1) * (va + vb + C2));
        ++count;
      }
  return total / static_cast<double>(count);
}

/// Analytic IoU of two equal-radius discs from their center distance
/// (circular lens overlap).
inline double disc_iou(double d, double r) {
  if (!(r > 0.0)) throw Error("disc_iou: radius must be positive");
  if (d >= 2.0 * r) return 0.0;
  if (d <= 0.0) return 1.0;
  const double lens = 2.0 * r * r * std::acos(d / (2.0 * r)) -
                      0.5 * d * std::sqrt(4.0 * r * r - d * d);
  constexpr double kPi = 3.14159265358979323846;
  return lens / (2.0 * kPi * r * r - lens);
}

/// Trajectory IoU: discs of the GT radius placed at estimated and ground
/// truth centers at every gt time, IoU averaged over times. The estimated
/// trajectory is resampled onto the gt times by linear interpolation;
/// absent estimates contribute 0.
inline double tiou(const Trajectory& est, const Trajectory& gt) {
  if (gt.points.empty()) throw Error("tiou: empty gt trajectory");
  if (!gt.radius) throw Error("tiou: gt trajectory has no radius");
  const double r = *gt.radius;

  // present estimated points only, for interpolation
  std::vector<Trajectory::Point> ep;
  for (const auto& p : est.points)
    if (p.present) ep.push_back(p);

  auto est_at = [&](double t) -> std::optional<std::pair<double, double>> {
    if (ep.empty()) return std::nullopt;
    if (t <= ep.front().t) return std::make_pair(ep.front().x, ep.front().y);
    if (t >= ep.back().t) return std::make_pair(ep.back().x, ep.back().y);
    for (std::size_t i = 0; i + 1 < ep.size(); ++i) {
      if (t <= ep[i + 1].t) {
        const double span = ep[i + 1].t - ep[i].t;
        const double w = span > 0.0 ? (t - ep[i].t) / span : 0.0;
        return std::make_pair((1.0 - w) * ep[i].x + w * ep[i + 1].x,
                              (1.0 - w) * ep[i].y + w * ep[i + 1].y);
      }
    }
    return std::make_pair(ep.back().x, ep.back().y);
  };

  double sum = 0.0;
  for (const auto& gp : gt.points) {
    if (!gp.present) continue;
    auto e = est_at(gp.t);
    if (!e) continue;  // absent estimate contributes 0
    const double dx = e->first - gp.x, dy = e->second - gp.y;
    sum += disc_iou(std::sqrt(dx * dx + dy * dy), r);
  }
  std::size_t n_gt = 0;
  for (const auto& gp : gt.points)
    if (gp.present) ++n_gt;
  if (n_gt == 0) throw Error("tiou: empty gt trajectory");
  return sum / static_cast<double>(n_gt);
}

struct EvalReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> tiou;
  TimeDirection direction = TimeDirection::forward;
  std::vector<std::pair<double, double>> per_subframe;  // (psnr, ssim)
};

namespace detail {

inline std::vector<Image> superres_frames(const RenderingStack& stack,
                                          const Image& B, int l,
                                          double epsilon) {
  std::vector<Image> frames;
  frames.reserve(l);
  for (int k = 0; k < l; ++k)
    frames.push_back(compose_exposure(stack, B, l, epsilon, k));
  return frames;
}

struct DirectionScore {
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::vector<std::pair<double, double>> per_frame;
};

inline DirectionScore score_frames(const std::vector<Image>& pred,
                                   const std::vector<Image>& gt) {
  DirectionScore s;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double p = psnr(pred[k], gt[k]);
    const double q = ssim(pred[k], gt[k]);
    s.per_frame.emplace_back(p, q);
    s.mean_psnr += p;
    s.mean_ssim += q;
  }
  s.mean_psnr /= static_cast<double>(gt.size());
  s.mean_ssim /= static_cast<double>(gt.size());
  return s;
}

inline std::optional<Trajectory> try_extract_trajectory(
    const RenderingStack& stack) {
  try {
    return extract_trajectory(stack);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Full evaluation protocol: l full-exposure frames from the estimated and
/// the GT stack, scored for the forward and the time-reversed pairing, the
/// direction with the higher mean PSNR reported (ties forward).
inline EvalReport evaluate(const RenderingStack& est_stack,
                           const SynthSample& sample, int l = 8,
                           double epsilon = 1.0) {
  if (est_stack.width() != sample.B.width ||
      est_stack.height() != sample.B.height)
    throw Error("evaluate: dimension mismatch");

  const std::vector<Image> gt_frames =
      detail::superres_frames(sample.gt_stack, sample.B, l, epsilon);
  const RenderingStack est_rev = reverse(est_stack);
  const auto fwd = detail::score_frames(
      detail::superres_frames(est_stack, sample.B, l, epsilon), gt_frames);
  const auto bwd = detail::score_frames(
      detail::superres_frames(est_rev, sample.B, l, epsilon), gt_frames);

  Trajectory gt_traj = sample.gt_traj;
  if (!gt_traj.radius) gt_traj = extract_trajectory(sample.gt_stack);

  auto traj_score = [&](const RenderingStack& s) {
    auto t = detail::try_extract_trajectory(s);
    return t ? tiou(*t, gt_traj) : 0.0;
  };

  EvalReport rep;
  if (bwd.mean_psnr > fwd.mean_psnr) {
    rep.direction = TimeDirection::backward;
    rep.psnr_db = bwd.mean_psnr;
    rep.ssim = bwd.mean_ssim;
    rep.per_subframe = bwd.per_frame;
    rep.tiou = traj_score(est_rev);
  } else {
    rep.direction = TimeDirection::forward;
    rep.psnr_db = fwd.mean_psnr;
    rep.ssim = fwd.mean_ssim;
    rep.per_subframe = fwd.per_frame;
    rep.tiou = traj_score(est_stack);
  }
  return rep;
}

enum class BaselineKind { input_I, background_B };

/// Uses the input image (or the background) as every super-resolved frame
/// prediction. TIoU is undefined for these baselines and reported absent.
inline EvalReport baseline_report(const SynthSample& sample, BaselineKind kind,
                                  int l = 8, double epsilon = 1.0) {
  const std::vector<Image> gt_frames =
      detail::superres_frames(sample.gt_stack, sample.B, l, epsilon);
  const Image& pred = kind == BaselineKind::input_I ? sample.I : sample.B;
  std::vector<Image> preds(l, pred);
  const auto s = detail::score_frames(preds, gt_frames);
  EvalReport rep;
  rep.psnr_db = s.mean_psnr;
  rep.ssim = s.mean_ssim;
  rep.per_subframe = s.per_frame;
  rep.direction = TimeDirection::forward;
  rep.tiou = std::nullopt;
  return rep;
}

}  // namespace fmo
