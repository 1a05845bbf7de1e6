#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fmo/image.hpp"

namespace fmo {

/// Sparse trajectory blur kernel: integer-offset taps with non-negative
/// weights summing to one.
struct BlurKernel {
  struct Tap {
    int dx = 0;
    int dy = 0;
    double weight = 0.0;
  };
  std::vector<Tap> taps;

  double weight_sum() const {
    double s = 0.0;
    for (const Tap& t : taps) s += t.weight;
    return s;
  }
};

namespace detail {

/// Temporal integration of the stack against B, no clamping.
/// out = (1/N) * sum_i F_i M_i + (1 - (1/N) * sum_i M_i) * B
inline Image compose_subframes_raw(const RenderingStack& stack, const Image& B) {
  require_same_dims(stack.renderings.front().F, B, "compose_subframes");
  const double inv_n = 1.0 / static_cast<double>(stack.size());
  Image out(B.width, B.height, 3);
  for (int y = 0; y < B.height; ++y)
    for (int x = 0; x < B.width; ++x) {
      double fm[3] = {0.0, 0.0, 0.0};
      double msum = 0.0;
      for (const Rendering& r : stack.renderings) {
        const double m = r.M.at(x, y, 0);
        msum += m;
        for (int c = 0; c < 3; ++c) fm[c] += r.F.at(x, y, c) * m;
      }
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = inv_n * fm[c] + (1.0 - inv_n * msum) * B.at(x, y, c);
    }
  return out;
}

}  // namespace detail

/// Discrete temporal-integration composite of a rendering stack over B,
/// clamped to [0,1].
inline Image compose_subframes(const RenderingStack& stack, const Image& B) {
  return clamp01(detail::compose_subframes_raw(stack, B));
}

namespace detail {

/// Linear interpolation of (F, M) at time t between the two nearest
/// stack samples.
inline Rendering interpolate_rendering(const RenderingStack& stack, double t) {
  const std::size_t n = stack.size();
  if (n == 1) return stack.renderings.front();
  const double pos = t * static_cast<double>(n - 1);
  std::size_t i0 = static_cast<std::size_t>(pos);
  if (i0 >= n - 1) i0 = n - 2;
  const double w = pos - static_cast<double>(i0);
  const Rendering& a = stack.renderings[i0];
  const Rendering& b = stack.renderings[i0 + 1];
  if (w == 0.0) return a;
  Rendering out(Image(a.width(), a.height(), 3), Image(a.width(), a.height(), 1));
  for (std::size_t i = 0; i < a.F.size(); ++i)
    out.F.data[i] = (1.0 - w) * a.F.data[i] + w * b.F.data[i];
  for (std::size_t i = 0; i < a.M.size(); ++i)
    out.M.data[i] = (1.0 - w) * a.M.data[i] + w * b.M.data[i];
  return out;
}

inline Image compose_instant_raw(const RenderingStack& stack, const Image& B,
                                 double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("compose_instant: t outside [0,1]");
  require_same_dims(stack.renderings.front().F, B, "compose_instant");
  Rendering r = interpolate_rendering(stack, t);
  Image out(B.width, B.height, 3);
  for (int y = 0; y < B.height; ++y)
    for (int x = 0; x < B.width; ++x) {
      const double m = r.M.at(x, y, 0);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = r.F.at(x, y, c) * m + (1.0 - m) * B.at(x, y, c);
    }
  return out;
}

}  // namespace detail

/// Zero-exposure frame at sub-frame time t: F_t M_t + (1 - M_t) B.
inline Image compose_instant(const RenderingStack& stack, const Image& B,
                             double t) {
  return clamp01(detail::compose_instant_raw(stack, B, t));
}

/// One frame of temporal super-resolution by l with exposure fraction
/// epsilon: the average of 5 midpoint samples over [k/l, (k+epsilon)/l].
/// The samples are summed symmetrically so a time-reversed stack yields
/// bit-identical frames in reversed order (epsilon = 1).
inline Image compose_exposure(const RenderingStack& stack, const Image& B,
                              int l, double epsilon, int k) {
  if (l < 1 || k < 0 || k >= l) throw Error("compose_exposure: invalid k or l");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error("compose_exposure: epsilon outside (0,1]");
  constexpr int kSamples = 5;
  const double t0 = static_cast<double>(k) / l;
  std::vector<Image> samples;
  samples.reserve(kSamples);
  for (int j = 0; j < kSamples; ++j) {
    const double t = t0 + epsilon / l * ((j + 0.5) / kSamples);
    samples.push_back(detail::compose_instant_raw(stack, B, std::min(t, 1.0)));
  }
  Image out(B.width, B.height, 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s =
        (samples[0].data[i] + samples[4].data[i]) +
        (samples[1].data[i] + samples[3].data[i]) + samples[2].data[i];
    out.data[i] = s / kSamples;
  }
  return clamp01(out);
}

/// Classical blatting model: I = H*F + (1 - H*M) B, zero padding outside
/// the image domain. Expects F premultiplied (F <= M pointwise).
inline Image compose_blatting(const Image& F, const Image& M,
                              const BlurKernel& H, const Image& B) {
  if (F.channels != 3 || M.channels != 1 || B.channels != 3)
    throw Error("compose_blatting: F/B must be 3-channel, M 1-channel");
  if (F.width != M.width || F.height != M.height)
    throw Error("compose_blatting: F and M dimensions differ");
  require_same_dims(F, B, "compose_blatting");
  if (std::abs(H.weight_sum() - 1.0) > 1e-9)
    throw Error("compose_blatting: kernel not normalized");
  for (int y = 0; y < F.height; ++y)
    for (int x = 0; x < F.width; ++x)
      for (int c = 0; c < 3; ++c)
        if (F.at(x, y, c) > M.at(x, y, 0) + 1e-9)
          throw Error("compose_blatting: F > M");

  Image out(B.width, B.height, 3);
  for (int y = 0; y < B.height; ++y)
    for (int x = 0; x < B.width; ++x) {
      double hf[3] = {0.0, 0.0, 0.0};
      double hm = 0.0;
      for (const BlurKernel::Tap& t : H.taps) {
        const int sx = x - t.dx;
        const int sy = y - t.dy;
        if (sx < 0 || sx >= B.width || sy < 0 || sy >= B.height) continue;
        hm += t.weight * M.at(sx, sy, 0);
        for (int c = 0; c < 3; ++c) hf[c] += t.weight * F.at(sx, sy, c);
      }
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = hf[c] + (1.0 - hm) * B.at(x, y, c);
    }
  return clamp01(out);
}

}  // namespace fmo
