#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jspace/types.hpp"

namespace jspace {

/// Per-landmark 2D likelihood grids. Values are stored channel-major,
/// row-major within a channel (index = c*W*H + y*W + x).
struct HeatmapStack {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> values;

  static HeatmapStack zeros(int width, int height, int channels);

  std::size_t index(int c, int x, int y) const {
    return static_cast<std::size_t>(c) * width * height +
           static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
  }
  float at(int c, int x, int y) const { return values[index(c, x, y)]; }
  float& at(int c, int x, int y) { return values[index(c, x, y)]; }

  /// channels >= 1, width/height >= 3 (sub-pixel refinement needs a 3x3
  /// neighborhood), all values finite.
  void validate() const;
};

/// Candidate extraction parameters. value_threshold is the fraction r of
/// the per-channel maximum a peak must reach; min_distance is the
/// suppression radius D in heatmap pixels.
struct DecodeConfig {
  double value_threshold = 0.75;
  double min_distance = 5.0;
  int max_candidates = 3;
  /// Endpoint-aligned heatmap-to-image mapping (x * (W-1)/(W'-1)); when
  /// false, plain size-ratio scaling (x * W/W') is used instead.
  bool endpoint_aligned = true;

  void validate() const;
};

struct ArgmaxPeak {
  GridPoint pos;
  float value = 0.0f;
  /// Set when the channel is constant and the argmax is meaningless.
  bool no_peak = false;
};

/// Global per-channel maxima; ties broken by smallest y, then smallest x.
std::vector<ArgmaxPeak> argmax_decode(const HeatmapStack& h);

struct Candidate {
  GridPoint pos;
  float value = 0.0f;
};

/// Per-landmark candidate peaks, each list nonempty and sorted by
/// descending value, pairwise separated by at least min_distance.
struct CandidateSet {
  std::vector<std::vector<Candidate>> per_landmark;
};

/// Strict 8-neighborhood local maxima, thresholded at r x channel max,
/// greedily suppressed within radius D, truncated to max_candidates.
/// The channel argmax always survives.
CandidateSet extract_candidates(const HeatmapStack& h, const DecodeConfig& cfg);

struct RefinedPoint {
  Point2d pos;
  /// Peak was within 1 px of the border and passed through unrefined.
  bool border = false;
};

/// Second-order Taylor refinement at each integer peak: offset =
/// -Hessian^-1 * gradient from central finite differences, components
/// clamped to [-0.5, 0.5]. Non-negative-definite Hessians get offset 0.
std::vector<RefinedPoint> subpixel_refine(const HeatmapStack& h,
                                          std::span<const GridPoint> coords);

/// Unbiased endpoint-aligned coordinate transform between heatmap and
/// image resolutions: x_img = x_hm * (W-1)/(W'-1). All dims must be >= 2.
Point2d heatmap_to_image(Point2d hm, int hm_width, int hm_height,
                         int img_width, int img_height);
Point2d image_to_heatmap(Point2d img, int hm_width, int hm_height,
                         int img_width, int img_height);

std::vector<Point2d> heatmap_to_image(std::span<const Point2d> hm,
                                      int hm_width, int hm_height,
                                      int img_width, int img_height);

}  // namespace jspace
