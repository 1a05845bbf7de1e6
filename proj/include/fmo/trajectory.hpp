#pragma once

#include <optional>
#include <vector>

#include "fmo/image.hpp"

namespace fmo {

/// Sub-pixel object-center path sampled at sub-frame times in [0,1].
/// A point may be absent when the mask carries no mass at that time.
struct Trajectory {
  struct Point {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    bool present = true;
  };
  std::vector<Point> points;
  std::optional<double> radius;  // pixels
};

/// Center of mass of each mask in the stack; sub-frames with mass below
/// 1e-6 are marked absent. The radius is the mean equivalent-disc radius
/// of the present masks.
inline Trajectory extract_trajectory(const RenderingStack& stack) {
  Trajectory traj;
  double radius_sum = 0.0;
  std::size_t present = 0;
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    MaskCentroid c = mask_centroid(stack.renderings[i].M);
    Trajectory::Point pt;
    pt.t = stack.time(i);
    pt.present = c.present;
    if (c.present) {
      pt.x = c.x;
      pt.y = c.y;
      radius_sum += std::sqrt(c.mass / kPi);
      ++present;
    }
    traj.points.push_back(pt);
  }
  if (present == 0) throw Error("extract_trajectory: no object");
  traj.radius = radius_sum / static_cast<double>(present);
  return traj;
}

}  // namespace fmo
