#pragma once

#include <string>
#include <vector>

namespace jspace {

/// Integer heatmap-grid coordinate.
struct GridPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const GridPoint& a, const GridPoint& b) {
    return a.x == b.x && a.y == b.y;
  }
};

/// Fractional 2D coordinate (heatmap or image pixels depending on context).
struct Point2d {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2d& a, const Point2d& b) {
    return a.x == b.x && a.y == b.y;
  }
};

/// One image's landmark annotation or prediction, in image pixels.
/// Points are ordered by landmark index (landmark i is points[i-1] in the
/// 1-based numbering used by the CSV interchange format).
struct LandmarkSet {
  std::string image_id;
  std::vector<Point2d> points;
  /// Per-point validity; empty means all valid.
  std::vector<bool> valid;

  bool point_valid(std::size_t i) const { return valid.empty() || valid[i]; }
};

/// Pixel-to-millimeter conversion.
struct ScaleConfig {
  double mm_per_pixel = 0.0567;

  void validate() const;
};

}  // namespace jspace
