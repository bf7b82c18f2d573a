#include "jspace/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "jspace/error.hpp"

namespace jspace {

ReferenceBank build_reference_bank(std::span<const LandmarkSet> training,
                                   double fraction, std::uint64_t seed,
                                   double rank_tolerance,
                                   std::vector<std::string>* warnings) {
  if (training.empty()) {
    raise(ErrorCode::invalid_config, "training set is empty");
  }
  if (!(fraction > 0.0) || fraction > 1.0) {
    raise(ErrorCode::invalid_config, "sampling fraction must be in (0, 1]");
  }
  const std::size_t n = training.size();
  const std::size_t m = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)));

  // Partial Fisher-Yates; mt19937_64 output is standardized, so the same
  // seed draws the same sample everywhere.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng() % (n - j));
    std::swap(order[j], order[r]);
  }

  ReferenceBank bank;
  bank.sampling_fraction = fraction;
  bank.rng_seed = seed;
  for (std::size_t j = 0; j < m; ++j) {
    const LandmarkSet& lm = training[order[j]];
    SubspaceBasis basis;
    try {
      basis = shape_subspace_basis(ShapeMatrix::from_planar(lm.points),
                                   rank_tolerance);
    } catch (const Error& e) {
      if (warnings) {
        warnings->push_back("skipping training sample " + lm.image_id + ": " +
                            e.what());
      }
      continue;
    }
    if (basis.effective_dim() != 2) {
      if (warnings) {
        warnings->push_back("skipping training sample " + lm.image_id +
                            ": rank-deficient planar shape");
      }
      continue;
    }
    if (bank.bases.empty()) {
      bank.point_count = basis.point_count();
      bank.effective_dim = basis.effective_dim();
    } else if (basis.point_count() != bank.point_count) {
      raise(ErrorCode::dimension_mismatch,
            "training sample " + lm.image_id +
                " has inconsistent landmark count");
    }
    bank.bases.push_back(std::move(basis));
  }
  if (bank.bases.empty()) {
    raise(ErrorCode::invalid_config,
          "no usable training shapes; reference bank is empty");
  }
  return bank;
}

std::vector<Combination> enumerate_combinations(const CandidateSet& cands,
                                                std::uint64_t budget) {
  const std::size_t n_landmarks = cands.per_landmark.size();
  if (n_landmarks == 0) {
    raise(ErrorCode::invalid_input, "candidate set is empty");
  }
  std::uint64_t total = 1;
  bool overflow = false;
  for (const auto& list : cands.per_landmark) {
    if (list.empty()) {
      raise(ErrorCode::invalid_input,
            "every landmark needs at least one candidate");
    }
    const std::uint64_t count = list.size();
    if (total > std::numeric_limits<std::uint64_t>::max() / count) {
      overflow = true;
      break;
    }
    total *= count;
  }
  if (overflow || total > budget) {
    raise(ErrorCode::budget_exceeded,
          "combination count " +
              (overflow ? std::string("overflows 64 bits")
                        : std::to_string(total)) +
              " exceeds budget " + std::to_string(budget));
  }

  std::vector<Combination> out;
  out.reserve(total);
  std::vector<int> choice(n_landmarks, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    Combination c;
    c.choice = choice;
    c.index = idx;
    c.points.reserve(n_landmarks);
    for (std::size_t k = 0; k < n_landmarks; ++k) {
      c.points.push_back(cands.per_landmark[k][choice[k]].pos);
    }
    out.push_back(std::move(c));
    // Odometer increment, last landmark fastest.
    for (std::size_t k = n_landmarks; k-- > 0;) {
      if (++choice[k] < static_cast<int>(cands.per_landmark[k].size())) break;
      choice[k] = 0;
    }
  }
  return out;
}

namespace {

std::vector<Point2d> to_points2d(std::span<const GridPoint> pts) {
  std::vector<Point2d> out;
  out.reserve(pts.size());
  for (const GridPoint& p : pts) {
    out.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  }
  return out;
}

/// Bank bases stacked column-wise for one-GEMM scoring:
/// sum_i |Phi^T Psi_i|_F^2 = |Phi^T [Psi_1 ... Psi_M]|_F^2.
Eigen::MatrixXd stack_bank(const ReferenceBank& bank) {
  const int k = bank.point_count;
  const int n = bank.effective_dim;
  Eigen::MatrixXd stacked(k, n * static_cast<int>(bank.size()));
  for (std::size_t i = 0; i < bank.size(); ++i) {
    stacked.middleCols(static_cast<int>(i) * n, n) = bank.bases[i].vectors;
  }
  return stacked;
}

}  // namespace

Combination ssr_select(const CandidateSet& cands, const ReferenceBank& bank,
                       std::uint64_t budget) {
  const int n_landmarks = static_cast<int>(cands.per_landmark.size());
  if (bank.bases.empty()) {
    raise(ErrorCode::invalid_config, "reference bank is empty");
  }
  if (n_landmarks != bank.point_count) {
    raise(ErrorCode::dimension_mismatch,
          "bank was built for " + std::to_string(bank.point_count) +
              " landmarks, candidates have " + std::to_string(n_landmarks));
  }

  const bool all_single =
      std::all_of(cands.per_landmark.begin(), cands.per_landmark.end(),
                  [](const auto& list) { return list.size() == 1; });
  if (all_single) {
    Combination c;
    c.index = 0;
    c.choice.assign(n_landmarks, 0);
    for (const auto& list : cands.per_landmark) c.points.push_back(list[0].pos);
    return c;
  }

  const std::vector<Combination> combos = enumerate_combinations(cands, budget);
  const Eigen::MatrixXd stacked = stack_bank(bank);
  const double denom =
      static_cast<double>(bank.effective_dim) * static_cast<double>(bank.size());

  double best_score = -std::numeric_limits<double>::infinity();
  const Combination* best = nullptr;
  for (const Combination& c : combos) {
    double score = -std::numeric_limits<double>::infinity();
    try {
      const SubspaceBasis basis =
          shape_subspace_basis(ShapeMatrix::from_planar(to_points2d(c.points)));
      if (basis.effective_dim() == bank.effective_dim) {
        score = (basis.vectors.transpose() * stacked).squaredNorm() / denom;
      }
    } catch (const Error&) {
      // Coincident candidate points; leave the score at -inf.
    }
    if (score > best_score) {
      best_score = score;
      best = &c;
    }
  }
  if (best == nullptr ||
      best_score == -std::numeric_limits<double>::infinity()) {
    raise(ErrorCode::refinement_failed,
          "every candidate combination has a degenerate shape");
  }
  return *best;
}

namespace {

std::vector<Point2d> finish_pipeline(const HeatmapStack& h,
                                     const DecodeConfig& cfg,
                                     std::span<const GridPoint> peaks,
                                     int img_width, int img_height) {
  const std::vector<RefinedPoint> refined = subpixel_refine(h, peaks);
  std::vector<Point2d> out;
  out.reserve(refined.size());
  for (const RefinedPoint& r : refined) {
    if (cfg.endpoint_aligned) {
      out.push_back(
          heatmap_to_image(r.pos, h.width, h.height, img_width, img_height));
    } else {
      out.push_back({r.pos.x * static_cast<double>(img_width) / h.width,
                     r.pos.y * static_cast<double>(img_height) / h.height});
    }
  }
  return out;
}

}  // namespace

std::vector<Point2d> decode_landmarks(const HeatmapStack& h,
                                      const DecodeConfig& cfg, int img_width,
                                      int img_height) {
  cfg.validate();
  const std::vector<ArgmaxPeak> peaks = argmax_decode(h);
  std::vector<GridPoint> ints;
  ints.reserve(peaks.size());
  for (const ArgmaxPeak& p : peaks) ints.push_back(p.pos);
  return finish_pipeline(h, cfg, ints, img_width, img_height);
}

std::vector<Point2d> refine_landmarks(const HeatmapStack& h,
                                      const DecodeConfig& cfg,
                                      const ReferenceBank* bank, int img_width,
                                      int img_height, std::uint64_t budget) {
  cfg.validate();
  if (bank == nullptr || h.channels < 3) {
    return decode_landmarks(h, cfg, img_width, img_height);
  }
  const CandidateSet cands = extract_candidates(h, cfg);
  const Combination chosen = ssr_select(cands, *bank, budget);
  return finish_pipeline(h, cfg, chosen.points, img_width, img_height);
}

}  // namespace jspace
