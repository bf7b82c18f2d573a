#pragma once

#include <string>
#include <vector>

#include "jspace/types.hpp"

namespace jspace {

struct PromptPoint {
  Point2d pos;
  std::string provenance;
};

/// Point prompts for point-based bone segmentation, derived from an
/// eight-landmark detection.
struct PromptSet {
  std::vector<PromptPoint> positives;
  std::vector<PromptPoint> negatives;
  /// The published negative-prompt list repeats (x4, y3); the repeat is
  /// kept as-is and flagged here.
  bool duplicate_negative = false;
};

/// Positives are landmarks 3..8; negatives are fixed coordinate formulas
/// over the landmark positions. Requires exactly 8 finite landmarks.
PromptSet generate_prompts(const LandmarkSet& lm);

/// Interchange payload: {"positives":[[x,y],...],"negatives":[[x,y],...]}.
std::string prompt_set_to_json(const PromptSet& prompts);

}  // namespace jspace
