#include "jspace/prompts.hpp"

#include <cmath>

#include <json.hpp>

#include "jspace/error.hpp"

namespace jspace {

PromptSet generate_prompts(const LandmarkSet& lm) {
  if (lm.points.size() != 8) {
    raise(ErrorCode::invalid_input,
          "prompt generation needs exactly 8 landmarks, got " +
              std::to_string(lm.points.size()));
  }
  for (const Point2d& p : lm.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      raise(ErrorCode::invalid_input, "landmark coordinates must be finite");
    }
  }
  // 1-based landmark aliases matching the published formulas.
  const Point2d& p1 = lm.points[0];
  const Point2d& p2 = lm.points[1];
  const Point2d& p3 = lm.points[2];
  const Point2d& p4 = lm.points[3];
  const Point2d& p5 = lm.points[4];
  const Point2d& p8 = lm.points[7];

  PromptSet out;
  for (int k = 3; k <= 8; ++k) {
    out.positives.push_back(
        {lm.points[k - 1], "landmark_" + std::to_string(k)});
  }
  out.negatives = {
      {{p4.x, p3.y}, "(x4, y3)"},
      {{p4.x, p3.y}, "(x4, y3)"},  // repeated in the source formula list
      {{p5.x, p4.y}, "(x5, y4)"},
      {{p5.x, 2.0 * p5.y - p4.y}, "(x5, 2*y5 - y4)"},
      {{p8.x, 2.0 * p5.y - p4.y}, "(x8, 2*y5 - y4)"},
      {{(p1.x + p2.x) / 2.0, (p1.y + p2.y) / 2.0}, "((x1+x2)/2, (y1+y2)/2)"},
  };
  out.duplicate_negative = true;
  return out;
}

std::string prompt_set_to_json(const PromptSet& prompts) {
  nlohmann::ordered_json j;
  j["positives"] = nlohmann::ordered_json::array();
  for (const PromptPoint& p : prompts.positives) {
    j["positives"].push_back({p.pos.x, p.pos.y});
  }
  j["negatives"] = nlohmann::ordered_json::array();
  for (const PromptPoint& p : prompts.negatives) {
    j["negatives"].push_back({p.pos.x, p.pos.y});
  }
  return j.dump();
}

}  // namespace jspace
