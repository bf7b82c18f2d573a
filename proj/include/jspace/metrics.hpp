#pragma once

#include <span>
#include <string>
#include <vector>

#include "jspace/types.hpp"

namespace jspace {

enum class StdMode {
  population,  // divide by n
  sample,      // divide by n-1
};

/// Mean Euclidean distance (mm) between predicted and ground-truth
/// positions of landmark k. preds and gts are matched by image_id.
double mae_per_landmark(std::span<const LandmarkSet> preds,
                        std::span<const LandmarkSet> gts, int k,
                        const ScaleConfig& scale);

/// Mean absolute difference (mm) between predicted and ground-truth
/// inter-landmark distances for the pair (i1, i2).
double ede(std::span<const LandmarkSet> preds,
           std::span<const LandmarkSet> gts, int i1, int i2,
           const ScaleConfig& scale);

struct LodResult {
  double lod_mm = 0.0;
  bool distinguishable_at_1_2mm = false;
};

/// Limit of detection under the 3-sigma rule for a paired difference:
/// lod = 3 * sqrt(2) * sigma. The flag reports whether a 1.2 mm change
/// clears the limit (with a 1e-3 mm rounding allowance at the boundary).
LodResult limit_of_detection(double sigma_mm);

struct FoldStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct FoldReport {
  std::vector<FoldStats> folds;
  /// Folds weighted equally regardless of size.
  double grand_mean = 0.0;
};

FoldReport fold_report(std::span<const std::vector<double>> per_fold_errors,
                       StdMode mode = StdMode::population);

/// One fold's (or the whole dataset's) measurement summary.
struct FoldMeasurement {
  std::string fold_id;
  std::size_t sample_count = 0;
  std::vector<double> per_landmark_mae_mm;
  double ave_all_mm = 0.0;  // mean MAE over all landmarks
  double ave2_mm = 0.0;     // mean MAE over landmarks 1 and 2
  double ede_mean_mm = 0.0;
  double ede_std_mm = 0.0;
  double lod_mm = 0.0;
  bool distinguishable_at_1_2mm = false;
};

struct MeasurementReport {
  std::vector<FoldMeasurement> folds;
  FoldMeasurement overall;  // grand view, folds weighted equally
  /// Predicted joint-space length per sample (mm), sorted by image_id.
  std::vector<double> per_sample_length_mm;
};

/// Groups samples into named folds by image_id; ids absent from every
/// group fall into no fold.
struct FoldAssignment {
  std::string fold_id;
  std::vector<std::string> image_ids;
};

/// Full evaluation: per-landmark MAE, joint-space EDE between landmarks
/// i1 and i2, fold-wise mean +- std, and LoD derived from each fold's EDE
/// spread. With an empty fold list everything lands in one fold "all".
MeasurementReport evaluate_dataset(std::span<const LandmarkSet> preds,
                                   std::span<const LandmarkSet> gts,
                                   const ScaleConfig& scale,
                                   std::span<const FoldAssignment> folds = {},
                                   int i1 = 0, int i2 = 1,
                                   StdMode mode = StdMode::population);

}  // namespace jspace
