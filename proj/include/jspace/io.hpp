#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jspace/heatmap.hpp"
#include "jspace/types.hpp"

namespace jspace {

/// Participant-level split for one cross-validation fold. The three lists
/// must be pairwise disjoint.
struct FoldSpec {
  std::string fold_id;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  void validate() const;
};

/// Loads the landmark CSV (header image_id,landmark_index,x,y; 1-based
/// landmark indices). Returns one LandmarkSet per image_id, sorted by
/// image_id, with a consistent landmark count across the table.
std::vector<LandmarkSet> load_landmark_table(const std::filesystem::path& path);

/// Writes the landmark CSV sorted by image_id then landmark_index, with
/// shortest round-trip decimal coordinates and \n line endings.
void save_landmark_table(const std::filesystem::path& path,
                         std::span<const LandmarkSet> sets);

/// Reads a .hmt container: one JSON header line
/// {"w":W,"h":H,"c":C,"dtype":"f32le","layout":"chw"} followed by exactly
/// 4*W*H*C bytes of little-endian floats, channel-major.
HeatmapStack load_heatmaps(const std::filesystem::path& path);

void save_heatmaps(const std::filesystem::path& path, const HeatmapStack& h);

/// Parses the fold-spec JSON {"fold":id,"train":[...],"val":[...],
/// "test":[...]} and validates disjointness.
FoldSpec load_fold_spec(const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace jspace
