#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmo {

/// Error type thrown by every operation in this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dense raster of real intensities, row-major, nominal range [0,1].
/// Channel counts 1 (mask), 3 (color) and 4 (RGBA) are supported.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;

  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w < 1 || h < 1 || (c != 1 && c != 3 && c != 4))
      throw Error("invalid image dimensions");
  }

  double& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return data.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  bool same_dims(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  bool operator==(const Image& o) const = default;
};

inline void require_same_dims(const Image& a, const Image& b,
                              const char* where) {
  if (!a.same_dims(b))
    throw Error(std::string(where) + ": dimension mismatch");
}

inline void require_finite(const Image& img, const char* where) {
  for (double v : img.data)
    if (!std::isfinite(v)) throw Error(std::string(where) + ": non-finite pixel");
}

/// Clamps every value to [0,1]. Rejects non-finite input.
inline Image clamp01(const Image& img) {
  require_finite(img, "clamp01");
  Image out = img;
  for (double& v : out.data) v = std::min(std::max(v, 0.0), 1.0);
  return out;
}

/// Per-pixel, per-channel median of a stack of equally sized frames.
/// Even frame counts use the midpoint of the two central values.
inline Image median_background(const std::vector<Image>& frames) {
  if (frames.empty()) throw Error("median_background: empty frame list");
  const Image& first = frames.front();
  for (const Image& f : frames) require_same_dims(first, f, "median_background");

  Image out(first.width, first.height, first.channels);
  const std::size_t n = frames.size();
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) vals[k] = frames[k].data[i];
    std::nth_element(vals.begin(), vals.begin() + n / 2, vals.end());
    double m = vals[n / 2];
    if (n % 2 == 0) {
      double lo = *std::max_element(vals.begin(), vals.begin() + n / 2);
      m = 0.5 * (lo + m);
    }
    out.data[i] = m;
  }
  return out;
}

/// One sharp sub-frame: appearance F (3 channels) and alpha mask M (1 channel).
/// The effective foreground is always the product F*M.
struct Rendering {
  Image F;
  Image M;

  Rendering() = default;
  Rendering(Image f, Image m) : F(std::move(f)), M(std::move(m)) {
    if (F.channels != 3 || M.channels != 1)
      throw Error("Rendering: F must be 3-channel, M 1-channel");
    if (F.width != M.width || F.height != M.height)
      throw Error("Rendering: F and M dimensions differ");
  }

  int width() const { return F.width; }
  int height() const { return F.height; }

  bool operator==(const Rendering& o) const = default;
};

/// Ordered sub-frame renderings over t in [0,1], sampled at i/(N-1)
/// (a single entry sits at t = 0.5).
struct RenderingStack {
  std::vector<Rendering> renderings;

  RenderingStack() = default;
  explicit RenderingStack(std::vector<Rendering> r) : renderings(std::move(r)) {
    validate();
  }

  void validate() const {
    if (renderings.empty()) throw Error("RenderingStack: empty");
    for (const Rendering& r : renderings) {
      if (r.width() != renderings.front().width() ||
          r.height() != renderings.front().height())
        throw Error("RenderingStack: inconsistent dimensions");
    }
  }

  std::size_t size() const { return renderings.size(); }
  int width() const { return renderings.front().width(); }
  int height() const { return renderings.front().height(); }

  double time(std::size_t i) const {
    return size() == 1 ? 0.5 : static_cast<double>(i) / (size() - 1);
  }

  bool operator==(const RenderingStack& o) const = default;
};

inline RenderingStack reverse(const RenderingStack& s) {
  std::vector<Rendering> r(s.renderings.rbegin(), s.renderings.rend());
  return RenderingStack(std::move(r));
}

/// Centroid of a 1-channel mask, in pixel-index coordinates (x, y),
/// together with its total mass. Empty if the mass is below `min_mass`.
struct MaskCentroid {
  double x = 0.0;
  double y = 0.0;
  double mass = 0.0;
  bool present = false;
};

inline MaskCentroid mask_centroid(const Image& mask, double min_mass = 1e-6) {
  if (mask.channels != 1) throw Error("mask_centroid: mask must be 1-channel");
  double sx = 0.0, sy = 0.0, sm = 0.0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      double m = mask.at(x, y, 0);
      sm += m;
      sx += m * x;
      sy += m * y;
    }
  MaskCentroid c;
  c.mass = sm;
  if (sm >= min_mass) {
    c.present = true;
    c.x = sx / sm;
    c.y = sy / sm;
  }
  return c;
}

}  // namespace fmo
