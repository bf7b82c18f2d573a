#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "jspace/heatmap.hpp"
#include "jspace/refine.hpp"
#include "jspace/types.hpp"

namespace jspace {

/// Controlled experiment generator: templated elbow-like landmark
/// configurations, rendered Gaussian heatmaps, and injected spurious
/// peaks, used to exercise the full decode/refine/measure pipeline.
struct HarnessConfig {
  std::vector<Point2d> landmark_template;  // image px
  double jitter_sigma = 1.5;               // image px, per-point Gaussian
  double gaussian_sigma = 2.0;             // heatmap px, rendered peak width
  double spurious_rate = 0.0;              // probability per landmark
  double spurious_offset_min = 10.0;       // heatmap px
  double spurious_offset_max = 30.0;       // heatmap px
  double spurious_value_ratio = 1.05;      // spurious peak / true peak
  int image_width = 512;
  int image_height = 384;
  int heatmap_width = 128;
  int heatmap_height = 96;
  int train_count = 300;
  int test_count = 200;
  double translation_range = 8.0;  // image px, uniform on [-t, t]
  double rotation_range = 0.08;    // rad, uniform on [-a, a]
  double scale_min = 0.92;
  double scale_max = 1.08;
  double bank_fraction = 0.25;     // fraction of train shapes kept in the bank
  double mm_per_pixel = 0.0567;
  std::uint64_t rng_seed = 1;

  /// Eight-point planar arrangement: a five-point chain on the left
  /// (humerus side) and a three-point chain on the right (ulna side),
  /// with the measured gap between points 1 and 2.
  static std::vector<Point2d> default_template();

  void validate(const DecodeConfig& decode) const;
};

/// Independent generator stream for (seed, stream index); streams are
/// order-independent across samples.
std::mt19937_64 harness_stream(std::uint64_t seed, std::uint64_t stream);

/// Template + per-point jitter + a random global similarity transform,
/// resampled until every point is safely inside the image (at most 100
/// attempts).
LandmarkSet sample_landmark_instance(const HarnessConfig& cfg,
                                     std::mt19937_64& rng,
                                     const std::string& image_id);

/// One isotropic Gaussian per landmark at heatmap scale, peak value 1.0.
HeatmapStack render_heatmaps(const LandmarkSet& lm, const HarnessConfig& cfg);

struct Injection {
  int channel = 0;
  Point2d center;  // heatmap px
  double amplitude = 0.0;
};

struct InjectionResult {
  HeatmapStack heatmaps;
  std::vector<Injection> log;
};

/// With probability spurious_rate per landmark, adds one extra Gaussian
/// at a random offset within [offset_min, offset_max] of the true peak.
InjectionResult inject_spurious_peaks(const HeatmapStack& h,
                                      const LandmarkSet& lm,
                                      const HarnessConfig& cfg,
                                      std::mt19937_64& rng);

struct ExperimentRow {
  double rho = 0.0;
  std::string pipeline;  // naive | ssr | improvement
  std::string metric;    // mae_mm | ede_mm | failed_images
  double value = 0.0;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
};

/// Sweeps the spurious-peak rate over rho_grid: for each rho, evaluates
/// the plain argmax pipeline and the subspace-refined pipeline on
/// test_count fresh images against their generating landmarks, in mm.
/// Per-image failures are tallied, never aborting the sweep.
ExperimentTable run_experiment(const HarnessConfig& cfg,
                               std::span<const double> rho_grid,
                               const DecodeConfig& decode = {});

/// CSV rendering with header rho,pipeline,metric,value.
std::string experiment_table_to_csv(const ExperimentTable& table);

/// JSON summary grouped by rho.
std::string experiment_table_to_json(const ExperimentTable& table);

}  // namespace jspace
