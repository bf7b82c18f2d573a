#include "jspace/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jspace/error.hpp"

namespace jspace {

HeatmapStack HeatmapStack::zeros(int width, int height, int channels) {
  HeatmapStack h;
  h.width = width;
  h.height = height;
  h.channels = channels;
  h.values.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
  h.validate();
  return h;
}

void HeatmapStack::validate() const {
  if (channels < 1) {
    raise(ErrorCode::invalid_input, "heatmap stack needs at least 1 channel");
  }
  if (width < 3 || height < 3) {
    raise(ErrorCode::invalid_input,
          "heatmap dims must be >= 3, got " + std::to_string(width) + "x" +
              std::to_string(height));
  }
  if (values.size() != static_cast<std::size_t>(width) * height * channels) {
    raise(ErrorCode::invalid_input, "heatmap value count does not match dims");
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      raise(ErrorCode::invalid_input, "heatmap contains non-finite values");
    }
  }
}

void DecodeConfig::validate() const {
  if (!(value_threshold > 0.0) || value_threshold > 1.0) {
    raise(ErrorCode::invalid_config, "value_threshold must be in (0, 1]");
  }
  if (min_distance < 1.0) {
    raise(ErrorCode::invalid_config, "min_distance must be >= 1");
  }
  if (max_candidates < 1) {
    raise(ErrorCode::invalid_config, "max_candidates must be >= 1");
  }
}

std::vector<ArgmaxPeak> argmax_decode(const HeatmapStack& h) {
  h.validate();
  std::vector<ArgmaxPeak> peaks(h.channels);
  for (int c = 0; c < h.channels; ++c) {
    ArgmaxPeak best;
    best.pos = {0, 0};
    best.value = h.at(c, 0, 0);
    float lo = best.value;
    // Row-major scan with strict > keeps the first maximum encountered,
    // which is the smallest y then smallest x among ties.
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        const float v = h.at(c, x, y);
        lo = std::min(lo, v);
        if (v > best.value) {
          best.value = v;
          best.pos = {x, y};
        }
      }
    }
    best.no_peak = (lo == best.value);
    peaks[c] = best;
  }
  return peaks;
}

namespace {

bool is_strict_local_max(const HeatmapStack& h, int c, int x, int y) {
  const float v = h.at(c, x, y);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int nx = x + dx;
      const int ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= h.width || ny >= h.height) continue;
      if (h.at(c, nx, ny) >= v) return false;
    }
  }
  return true;
}

double sq_dist(GridPoint a, GridPoint b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

CandidateSet extract_candidates(const HeatmapStack& h,
                                const DecodeConfig& cfg) {
  h.validate();
  cfg.validate();
  const std::vector<ArgmaxPeak> argmax = argmax_decode(h);

  CandidateSet out;
  out.per_landmark.resize(h.channels);
  for (int c = 0; c < h.channels; ++c) {
    std::vector<Candidate> found;
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        if (is_strict_local_max(h, c, x, y)) {
          found.push_back({{x, y}, h.at(c, x, y)});
        }
      }
    }
    // The argmax may sit on a plateau and not be a strict maximum; it must
    // survive regardless.
    const GridPoint apos = argmax[c].pos;
    if (std::none_of(found.begin(), found.end(),
                     [&](const Candidate& p) { return p.pos == apos; })) {
      found.push_back({apos, argmax[c].value});
    }

    const double cutoff =
        cfg.value_threshold * static_cast<double>(argmax[c].value);
    std::erase_if(found, [&](const Candidate& p) {
      return static_cast<double>(p.value) < cutoff;
    });

    // Descending value; ties resolve row-major so the argmax sorts first.
    std::sort(found.begin(), found.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.value != b.value) return a.value > b.value;
                if (a.pos.y != b.pos.y) return a.pos.y < b.pos.y;
                return a.pos.x < b.pos.x;
              });

    std::vector<Candidate>& kept = out.per_landmark[c];
    const double min_sq = cfg.min_distance * cfg.min_distance;
    for (const Candidate& cand : found) {
      if (static_cast<int>(kept.size()) >= cfg.max_candidates) break;
      const bool suppressed =
          std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
            return sq_dist(k.pos, cand.pos) < min_sq;
          });
      if (!suppressed) kept.push_back(cand);
    }
  }
  return out;
}

std::vector<RefinedPoint> subpixel_refine(const HeatmapStack& h,
                                          std::span<const GridPoint> coords) {
  h.validate();
  if (coords.size() != static_cast<std::size_t>(h.channels)) {
    raise(ErrorCode::invalid_input,
          "expected one peak per channel, got " +
              std::to_string(coords.size()) + " for " +
              std::to_string(h.channels) + " channels");
  }
  std::vector<RefinedPoint> out;
  out.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const int c = static_cast<int>(i);
    const GridPoint p = coords[i];
    if (p.x < 0 || p.y < 0 || p.x >= h.width || p.y >= h.height) {
      raise(ErrorCode::invalid_input, "peak coordinate outside heatmap grid");
    }
    RefinedPoint r;
    if (p.x < 1 || p.y < 1 || p.x > h.width - 2 || p.y > h.height - 2) {
      r.pos = {static_cast<double>(p.x), static_cast<double>(p.y)};
      r.border = true;
      out.push_back(r);
      continue;
    }
    const double v00 = h.at(c, p.x, p.y);
    const double dx = (h.at(c, p.x + 1, p.y) - h.at(c, p.x - 1, p.y)) / 2.0;
    const double dy = (h.at(c, p.x, p.y + 1) - h.at(c, p.x, p.y - 1)) / 2.0;
    const double dxx = h.at(c, p.x + 1, p.y) - 2.0 * v00 + h.at(c, p.x - 1, p.y);
    const double dyy = h.at(c, p.x, p.y + 1) - 2.0 * v00 + h.at(c, p.x, p.y - 1);
    const double dxy = (h.at(c, p.x + 1, p.y + 1) - h.at(c, p.x + 1, p.y - 1) -
                        h.at(c, p.x - 1, p.y + 1) + h.at(c, p.x - 1, p.y - 1)) /
                       4.0;
    const double det = dxx * dyy - dxy * dxy;
    double ox = 0.0;
    double oy = 0.0;
    // offset = -H^-1 g, valid only where the Hessian is negative definite.
    if (dxx < 0.0 && det > 0.0) {
      ox = -(dyy * dx - dxy * dy) / det;
      oy = -(dxx * dy - dxy * dx) / det;
      ox = std::clamp(ox, -0.5, 0.5);
      oy = std::clamp(oy, -0.5, 0.5);
    }
    r.pos = {p.x + ox, p.y + oy};
    out.push_back(r);
  }
  return out;
}

namespace {

void check_transform_dims(int hm_width, int hm_height, int img_width,
                          int img_height) {
  if (hm_width < 2 || hm_height < 2 || img_width < 2 || img_height < 2) {
    raise(ErrorCode::invalid_config,
          "coordinate transform requires dims >= 2 on every axis");
  }
}

}  // namespace

Point2d heatmap_to_image(Point2d hm, int hm_width, int hm_height,
                         int img_width, int img_height) {
  check_transform_dims(hm_width, hm_height, img_width, img_height);
  return {hm.x * static_cast<double>(img_width - 1) / (hm_width - 1),
          hm.y * static_cast<double>(img_height - 1) / (hm_height - 1)};
}

Point2d image_to_heatmap(Point2d img, int hm_width, int hm_height,
                         int img_width, int img_height) {
  check_transform_dims(hm_width, hm_height, img_width, img_height);
  return {img.x * static_cast<double>(hm_width - 1) / (img_width - 1),
          img.y * static_cast<double>(hm_height - 1) / (img_height - 1)};
}

std::vector<Point2d> heatmap_to_image(std::span<const Point2d> hm,
                                      int hm_width, int hm_height,
                                      int img_width, int img_height) {
  std::vector<Point2d> out;
  out.reserve(hm.size());
  for (const Point2d& p : hm) {
    out.push_back(heatmap_to_image(p, hm_width, hm_height, img_width,
                                   img_height));
  }
  return out;
}

}  // namespace jspace
