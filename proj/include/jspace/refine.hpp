#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jspace/heatmap.hpp"
#include "jspace/subspace.hpp"
#include "jspace/types.hpp"

namespace jspace {

/// Immutable bank of reference shape subspaces sampled from training
/// landmark sets. All bases share the point count K and effective_dim.
struct ReferenceBank {
  std::vector<SubspaceBasis> bases;
  double sampling_fraction = 1.0;
  std::uint64_t rng_seed = 0;
  int point_count = 0;
  int effective_dim = 0;

  std::size_t size() const { return bases.size(); }
};

/// Samples ceil(fraction * count) training sets uniformly without
/// replacement (seeded, deterministic) and precomputes their planar
/// (z = 0) shape-subspace bases. Training shapes with a degenerate or
/// rank-deficient subspace are skipped with a warning.
ReferenceBank build_reference_bank(std::span<const LandmarkSet> training,
                                   double fraction, std::uint64_t seed,
                                   double rank_tolerance = 1e-8,
                                   std::vector<std::string>* warnings = nullptr);

/// One candidate pick per landmark, in landmark order. index is the
/// position in the lexicographic enumeration of per-landmark choices.
struct Combination {
  std::vector<GridPoint> points;
  std::vector<int> choice;
  std::size_t index = 0;
};

inline constexpr std::uint64_t kDefaultCombinationBudget = 100000;

/// Full Cartesian product of per-landmark candidates in lexicographic
/// order of choice indices (last landmark varies fastest). Throws
/// ErrorCode::budget_exceeded when the product exceeds the budget.
std::vector<Combination> enumerate_combinations(
    const CandidateSet& cands,
    std::uint64_t budget = kDefaultCombinationBudget);

/// Selects the combination whose planar shape subspace has the highest
/// mean similarity to the bank; ties break toward the lowest combination
/// index. When every landmark has exactly one candidate the unique
/// combination is returned without scoring. Combinations whose subspace
/// is degenerate or rank-deficient score as -inf; if every combination is
/// degenerate, ErrorCode::refinement_failed is thrown.
Combination ssr_select(const CandidateSet& cands, const ReferenceBank& bank,
                       std::uint64_t budget = kDefaultCombinationBudget);

/// Heatmap decode pipeline without refinement: per-channel argmax,
/// sub-pixel refinement, heatmap-to-image mapping.
std::vector<Point2d> decode_landmarks(const HeatmapStack& h,
                                      const DecodeConfig& cfg, int img_width,
                                      int img_height);

/// Full refinement pipeline: candidate extraction, subspace-based
/// combination selection, sub-pixel refinement at the chosen peaks,
/// heatmap-to-image mapping. A null bank (or fewer than 3 landmarks)
/// falls back to the plain decode pipeline.
std::vector<Point2d> refine_landmarks(
    const HeatmapStack& h, const DecodeConfig& cfg, const ReferenceBank* bank,
    int img_width, int img_height,
    std::uint64_t budget = kDefaultCombinationBudget);

}  // namespace jspace
