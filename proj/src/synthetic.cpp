#include "jspace/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "jspace/error.hpp"
#include "jspace/io.hpp"
#include "jspace/metrics.hpp"

namespace jspace {

std::vector<Point2d> HarnessConfig::default_template() {
  return {
      {240.0, 200.0},  // 1: humerus, joint-side end
      {272.0, 204.0},  // 2: ulna, joint-side end
      {120.0, 140.0},  // 3
      {150.0, 170.0},  // 4
      {170.0, 210.0},  // 5
      {215.0, 192.0},  // 6
      {300.0, 210.0},  // 7
      {350.0, 230.0},  // 8
  };
}

void HarnessConfig::validate(const DecodeConfig& decode) const {
  decode.validate();
  if (landmark_template.size() < 3) {
    raise(ErrorCode::invalid_config, "template needs at least 3 landmarks");
  }
  if (spurious_rate < 0.0 || spurious_rate > 1.0) {
    raise(ErrorCode::invalid_config, "spurious_rate must be in [0, 1]");
  }
  if (!(spurious_value_ratio > decode.value_threshold) ||
      spurious_value_ratio > 1.2) {
    raise(ErrorCode::invalid_config,
          "spurious_value_ratio must lie in (value_threshold, 1.2]");
  }
  if (!(spurious_offset_min >= 0.0) ||
      spurious_offset_max < spurious_offset_min) {
    raise(ErrorCode::invalid_config, "bad spurious offset range");
  }
  if (!(jitter_sigma >= 0.0) || !(gaussian_sigma > 0.0)) {
    raise(ErrorCode::invalid_config, "sigmas must be nonnegative");
  }
  if (heatmap_width < 3 || heatmap_height < 3 || image_width < 2 ||
      image_height < 2) {
    raise(ErrorCode::invalid_config, "harness dims too small");
  }
  if (!(scale_min > 0.0) || scale_max < scale_min) {
    raise(ErrorCode::invalid_config, "bad scale range");
  }
  if (!(bank_fraction > 0.0) || bank_fraction > 1.0) {
    raise(ErrorCode::invalid_config, "bank_fraction must be in (0, 1]");
  }
  if (train_count < 1 || test_count < 1) {
    raise(ErrorCode::invalid_config, "sample counts must be >= 1");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Peaks stay at least this far from the heatmap border so that argmax and
// sub-pixel refinement never hit the border path.
constexpr double kHeatmapMargin = 2.0;

bool inside_bounds(const HarnessConfig& cfg, std::span<const Point2d> pts) {
  for (const Point2d& p : pts) {
    if (p.x < 0.0 || p.y < 0.0 || p.x > cfg.image_width - 1.0 ||
        p.y > cfg.image_height - 1.0) {
      return false;
    }
    const Point2d hm = image_to_heatmap(p, cfg.heatmap_width,
                                        cfg.heatmap_height, cfg.image_width,
                                        cfg.image_height);
    if (hm.x < kHeatmapMargin || hm.y < kHeatmapMargin ||
        hm.x > cfg.heatmap_width - 1.0 - kHeatmapMargin ||
        hm.y > cfg.heatmap_height - 1.0 - kHeatmapMargin) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::mt19937_64 harness_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

LandmarkSet sample_landmark_instance(const HarnessConfig& cfg,
                                     std::mt19937_64& rng,
                                     const std::string& image_id) {
  const std::size_t k = cfg.landmark_template.size();
  std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Point2d> pts(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double jx = cfg.jitter_sigma > 0.0 ? jitter(rng) : 0.0;
      const double jy = cfg.jitter_sigma > 0.0 ? jitter(rng) : 0.0;
      pts[i] = {cfg.landmark_template[i].x + jx,
                cfg.landmark_template[i].y + jy};
    }
    const double scale =
        cfg.scale_min + (cfg.scale_max - cfg.scale_min) * unit(rng);
    const double angle = cfg.rotation_range * (2.0 * unit(rng) - 1.0);
    const double tx = cfg.translation_range * (2.0 * unit(rng) - 1.0);
    const double ty = cfg.translation_range * (2.0 * unit(rng) - 1.0);

    Point2d centroid{0.0, 0.0};
    for (const Point2d& p : pts) {
      centroid.x += p.x / static_cast<double>(k);
      centroid.y += p.y / static_cast<double>(k);
    }
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    for (Point2d& p : pts) {
      const double dx = p.x - centroid.x;
      const double dy = p.y - centroid.y;
      p.x = centroid.x + scale * (ca * dx - sa * dy) + tx;
      p.y = centroid.y + scale * (sa * dx + ca * dy) + ty;
    }
    if (inside_bounds(cfg, pts)) {
      LandmarkSet lm;
      lm.image_id = image_id;
      lm.points = std::move(pts);
      return lm;
    }
  }
  raise(ErrorCode::invalid_config,
        "could not place landmarks inside bounds after 100 attempts");
}

HeatmapStack render_heatmaps(const LandmarkSet& lm, const HarnessConfig& cfg) {
  HeatmapStack h = HeatmapStack::zeros(cfg.heatmap_width, cfg.heatmap_height,
                                       static_cast<int>(lm.points.size()));
  const double inv = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);
  for (int c = 0; c < h.channels; ++c) {
    const Point2d center =
        image_to_heatmap(lm.points[c], cfg.heatmap_width, cfg.heatmap_height,
                         cfg.image_width, cfg.image_height);
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        const double dx = x - center.x;
        const double dy = y - center.y;
        h.at(c, x, y) = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv));
      }
    }
  }
  return h;
}

InjectionResult inject_spurious_peaks(const HeatmapStack& h,
                                      const LandmarkSet& lm,
                                      const HarnessConfig& cfg,
                                      std::mt19937_64& rng) {
  InjectionResult out;
  out.heatmaps = h;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);

  for (int c = 0; c < h.channels; ++c) {
    // Placement is resolved for every channel so generator consumption does
    // not depend on spurious_rate; sweeping rho with a shared seed then
    // injects nested channel sets at identical centers.
    const double u = unit(rng);
    const Point2d true_center =
        image_to_heatmap(lm.points[c], cfg.heatmap_width, cfg.heatmap_height,
                         cfg.image_width, cfg.image_height);
    Point2d center;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const double radius =
          cfg.spurious_offset_min +
          (cfg.spurious_offset_max - cfg.spurious_offset_min) * unit(rng);
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      center = {true_center.x + radius * std::cos(angle),
                true_center.y + radius * std::sin(angle)};
      placed = center.x >= kHeatmapMargin && center.y >= kHeatmapMargin &&
               center.x <= h.width - 1.0 - kHeatmapMargin &&
               center.y <= h.height - 1.0 - kHeatmapMargin;
    }
    if (!placed) {
      raise(ErrorCode::invalid_config,
            "spurious offset range does not fit inside the heatmap");
    }
    if (u >= cfg.spurious_rate) continue;
    const double amp = cfg.spurious_value_ratio;
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        const double dx = x - center.x;
        const double dy = y - center.y;
        out.heatmaps.at(c, x, y) += static_cast<float>(
            amp * std::exp(-(dx * dx + dy * dy) * inv));
      }
    }
    out.log.push_back({c, center, amp});
  }
  return out;
}

namespace {

struct PipelineStats {
  std::vector<LandmarkSet> preds;
  std::size_t failures = 0;
};

double dataset_mae(const std::vector<LandmarkSet>& preds,
                   const std::vector<LandmarkSet>& gts,
                   const ScaleConfig& scale) {
  double acc = 0.0;
  const int n_landmarks = static_cast<int>(preds.front().points.size());
  for (int k = 0; k < n_landmarks; ++k) {
    acc += mae_per_landmark(preds, gts, k, scale);
  }
  return acc / n_landmarks;
}

}  // namespace

ExperimentTable run_experiment(const HarnessConfig& cfg,
                               std::span<const double> rho_grid,
                               const DecodeConfig& decode) {
  cfg.validate(decode);
  if (rho_grid.empty()) {
    raise(ErrorCode::invalid_config, "empty rho grid");
  }
  const ScaleConfig scale{cfg.mm_per_pixel};

  // Reference bank from a fresh training population, shared by all rho.
  std::vector<LandmarkSet> train;
  train.reserve(cfg.train_count);
  HarnessConfig clean = cfg;
  clean.spurious_rate = 0.0;
  for (int i = 0; i < cfg.train_count; ++i) {
    std::mt19937_64 rng = harness_stream(cfg.rng_seed, i);
    train.push_back(
        sample_landmark_instance(clean, rng, "train_" + std::to_string(i)));
  }
  const ReferenceBank bank =
      build_reference_bank(train, cfg.bank_fraction, cfg.rng_seed);

  ExperimentTable table;
  for (std::size_t gi = 0; gi < rho_grid.size(); ++gi) {
    const double rho = rho_grid[gi];
    HarnessConfig run = cfg;
    run.spurious_rate = rho;

    std::vector<LandmarkSet> gts;
    PipelineStats naive;
    PipelineStats ssr;
    for (int i = 0; i < cfg.test_count; ++i) {
      // Test streams are disjoint from training streams; the same image
      // index draws the same instance at every rho.
      const std::uint64_t stream =
          static_cast<std::uint64_t>(cfg.train_count) + i;
      std::mt19937_64 rng = harness_stream(cfg.rng_seed, stream);
      const std::string image_id = "img_" + std::to_string(i);
      try {
        const LandmarkSet gt = sample_landmark_instance(run, rng, image_id);
        const HeatmapStack rendered = render_heatmaps(gt, run);
        const InjectionResult injected =
            inject_spurious_peaks(rendered, gt, run, rng);

        LandmarkSet naive_lm;
        naive_lm.image_id = image_id;
        naive_lm.points = decode_landmarks(injected.heatmaps, decode,
                                           cfg.image_width, cfg.image_height);
        LandmarkSet ssr_lm;
        ssr_lm.image_id = image_id;
        ssr_lm.points = refine_landmarks(injected.heatmaps, decode, &bank,
                                         cfg.image_width, cfg.image_height);
        gts.push_back(gt);
        naive.preds.push_back(std::move(naive_lm));
        ssr.preds.push_back(std::move(ssr_lm));
      } catch (const Error&) {
        ++naive.failures;
        ++ssr.failures;
      }
    }
    if (gts.empty()) {
      raise(ErrorCode::refinement_failed,
            "every test image failed at rho=" + format_double(rho));
    }

    const double naive_mae = dataset_mae(naive.preds, gts, scale);
    const double ssr_mae = dataset_mae(ssr.preds, gts, scale);
    const double naive_ede = ede(naive.preds, gts, 0, 1, scale);
    const double ssr_ede = ede(ssr.preds, gts, 0, 1, scale);

    table.rows.push_back({rho, "naive", "mae_mm", naive_mae});
    table.rows.push_back({rho, "naive", "ede_mm", naive_ede});
    table.rows.push_back(
        {rho, "naive", "failed_images", static_cast<double>(naive.failures)});
    table.rows.push_back({rho, "ssr", "mae_mm", ssr_mae});
    table.rows.push_back({rho, "ssr", "ede_mm", ssr_ede});
    table.rows.push_back(
        {rho, "ssr", "failed_images", static_cast<double>(ssr.failures)});
    table.rows.push_back(
        {rho, "improvement", "mae_mm", naive_mae - ssr_mae});
    table.rows.push_back(
        {rho, "improvement", "ede_mm", naive_ede - ssr_ede});
  }
  return table;
}

std::string experiment_table_to_csv(const ExperimentTable& table) {
  std::string out = "rho,pipeline,metric,value\n";
  for (const ExperimentRow& r : table.rows) {
    out += format_double(r.rho);
    out += ',';
    out += r.pipeline;
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += '\n';
  }
  return out;
}

std::string experiment_table_to_json(const ExperimentTable& table) {
  nlohmann::ordered_json by_rho = nlohmann::ordered_json::array();
  std::vector<double> seen;
  for (const ExperimentRow& r : table.rows) {
    if (std::find(seen.begin(), seen.end(), r.rho) == seen.end()) {
      seen.push_back(r.rho);
      by_rho.push_back({{"rho", r.rho}});
    }
  }
  for (auto& entry : by_rho) {
    const double rho = entry["rho"].get<double>();
    for (const ExperimentRow& r : table.rows) {
      if (r.rho == rho) {
        entry[r.pipeline][r.metric] = r.value;
      }
    }
  }
  nlohmann::ordered_json root;
  root["results"] = std::move(by_rho);
  return root.dump(2);
}

}  // namespace jspace
