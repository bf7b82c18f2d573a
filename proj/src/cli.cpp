#include "jspace/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jspace/error.hpp"
#include "jspace/io.hpp"
#include "jspace/metrics.hpp"
#include "jspace/prompts.hpp"
#include "jspace/subspace.hpp"
#include "jspace/synthetic.hpp"

namespace jspace {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorCode::io_failure, "cannot open " + path.string() +
                                     " for writing");
  }
  out << text;
  if (!out) {
    raise(ErrorCode::io_failure, "short write to " + path.string());
  }
}

nlohmann::json parse_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::io_failure, std::string("cannot open ") + what + " " +
                                     path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::bad_header, std::string(what) + " " + path.string() +
                                     " is not valid JSON");
  }
}

/// Participant grouping convention: everything before the first '_' or '/'
/// in the image id.
std::string participant_of(const std::string& image_id) {
  const std::size_t cut = image_id.find_first_of("_/");
  return cut == std::string::npos ? image_id : image_id.substr(0, cut);
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  const nlohmann::json j = parse_json_file(path, "config");
  RunConfig cfg;
  try {
    if (j.contains("decode")) {
      const auto& d = j.at("decode");
      if (d.contains("value_threshold"))
        cfg.decode.value_threshold = d.at("value_threshold").get<double>();
      if (d.contains("min_distance"))
        cfg.decode.min_distance = d.at("min_distance").get<double>();
      if (d.contains("max_candidates"))
        cfg.decode.max_candidates = d.at("max_candidates").get<int>();
      if (d.contains("endpoint_aligned"))
        cfg.decode.endpoint_aligned = d.at("endpoint_aligned").get<bool>();
    }
    if (j.contains("scale") && j.at("scale").contains("mm_per_pixel")) {
      cfg.scale.mm_per_pixel = j.at("scale").at("mm_per_pixel").get<double>();
    }
    if (j.contains("ssr")) {
      const auto& s = j.at("ssr");
      if (s.contains("enabled")) cfg.ssr.enabled = s.at("enabled").get<bool>();
      if (s.contains("fraction"))
        cfg.ssr.fraction = s.at("fraction").get<double>();
      if (s.contains("seed"))
        cfg.ssr.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("budget"))
        cfg.ssr.budget = s.at("budget").get<std::uint64_t>();
    }
    if (j.contains("paths")) {
      for (const auto& [key, value] : j.at("paths").items()) {
        cfg.paths[key] = fs::path(value.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception&) {
    raise(ErrorCode::invalid_config,
          "config " + path.string() + " has a field of the wrong type");
  }
  for (const auto& [key, p] : cfg.paths) {
    if (!fs::exists(p)) {
      raise(ErrorCode::invalid_config,
            "config path '" + key + "' does not exist: " + p.string());
    }
  }
  cfg.decode.validate();
  cfg.scale.validate();
  if (!(cfg.ssr.fraction > 0.0) || cfg.ssr.fraction > 1.0) {
    raise(ErrorCode::invalid_config, "ssr.fraction must be in (0, 1]");
  }
  return cfg;
}

namespace {

struct CommonOpts {
  std::string config_path;
  RunConfig cfg;

  void load() {
    if (!config_path.empty()) cfg = load_run_config(config_path);
  }
};

std::vector<fs::path> collect_hmt_files(const std::vector<std::string>& args) {
  std::vector<fs::path> files;
  for (const std::string& a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().extension() == ".hmt") files.push_back(entry.path());
      }
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      raise(ErrorCode::io_failure, "no such heatmap input: " + a);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    raise(ErrorCode::invalid_config, "no .hmt files to process");
  }
  return files;
}

int cmd_refine(const CommonOpts& common,
               const std::vector<std::string>& heatmap_args,
               const std::string& reference_path, const std::string& out_path,
               int img_width, int img_height, bool no_ssr) {
  const RunConfig& cfg = common.cfg;
  const std::vector<fs::path> files = collect_hmt_files(heatmap_args);

  ReferenceBank bank;
  bool use_ssr = false;
  if (!no_ssr && cfg.ssr.enabled && !reference_path.empty()) {
    const std::vector<LandmarkSet> training =
        load_landmark_table(reference_path);
    if (!training.empty() && training.front().points.size() >= 3) {
      std::vector<std::string> warnings;
      bank = build_reference_bank(training, cfg.ssr.fraction, cfg.ssr.seed,
                                  1e-8, &warnings);
      for (const std::string& w : warnings) {
        std::cerr << "warning: " << w << "\n";
      }
      use_ssr = true;
    } else {
      std::cerr << "warning: fewer than 3 landmarks in the reference table; "
                   "refinement disabled\n";
    }
  }

  std::vector<LandmarkSet> results;
  std::size_t failures = 0;
  for (const fs::path& file : files) {
    const std::string image_id = file.stem().string();
    try {
      const HeatmapStack h = load_heatmaps(file);
      LandmarkSet lm;
      lm.image_id = image_id;
      lm.points = refine_landmarks(h, cfg.decode, use_ssr ? &bank : nullptr,
                                   img_width, img_height, cfg.ssr.budget);
      results.push_back(std::move(lm));
    } catch (const Error& e) {
      ++failures;
      std::cerr << "warning: " << image_id << ": "
                << error_code_name(e.code()) << ": " << e.what() << "\n";
    }
  }
  if (results.empty()) {
    raise(ErrorCode::refinement_failed, "every heatmap file failed");
  }
  save_landmark_table(out_path, results);
  if (failures > 0) {
    std::cerr << "warning: " << failures << " of " << files.size()
              << " images failed\n";
  }
  return 0;
}

int cmd_measure(const CommonOpts& common, const std::string& landmarks_path,
                const std::string& out_path) {
  const std::vector<LandmarkSet> sets = load_landmark_table(landmarks_path);
  if (sets.front().points.size() < 2) {
    raise(ErrorCode::invalid_input,
          "joint-space measurement needs at least landmarks 1 and 2");
  }
  const double mm = common.cfg.scale.mm_per_pixel;
  std::string csv = "image_id,length_px,length_mm\n";
  for (const LandmarkSet& lm : sets) {
    const double px = std::hypot(lm.points[0].x - lm.points[1].x,
                                 lm.points[0].y - lm.points[1].y);
    csv += lm.image_id;
    csv += ',';
    csv += format_double(px);
    csv += ',';
    csv += format_double(px * mm);
    csv += '\n';
  }
  write_text(out_path, csv);
  return 0;
}

nlohmann::ordered_json fold_to_json(const FoldMeasurement& m) {
  nlohmann::ordered_json j;
  j["fold"] = m.fold_id;
  j["n_samples"] = m.sample_count;
  for (std::size_t k = 0; k < m.per_landmark_mae_mm.size(); ++k) {
    j["mae_lm" + std::to_string(k + 1) + "_mm"] = m.per_landmark_mae_mm[k];
  }
  j["ave_all_mm"] = m.ave_all_mm;
  j["ave2_mm"] = m.ave2_mm;
  j["ede_mean_mm"] = m.ede_mean_mm;
  j["ede_std_mm"] = m.ede_std_mm;
  j["lod_mm"] = m.lod_mm;
  j["distinguishable_at_1_2mm"] = m.distinguishable_at_1_2mm;
  return j;
}

void append_fold_csv(std::string& csv, const FoldMeasurement& m) {
  auto row = [&](const std::string& metric, const std::string& value) {
    csv += m.fold_id;
    csv += ',';
    csv += metric;
    csv += ',';
    csv += value;
    csv += '\n';
  };
  row("n_samples", std::to_string(m.sample_count));
  for (std::size_t k = 0; k < m.per_landmark_mae_mm.size(); ++k) {
    row("mae_lm" + std::to_string(k + 1) + "_mm",
        format_double(m.per_landmark_mae_mm[k]));
  }
  row("ave_all_mm", format_double(m.ave_all_mm));
  row("ave2_mm", format_double(m.ave2_mm));
  row("ede_mean_mm", format_double(m.ede_mean_mm));
  row("ede_std_mm", format_double(m.ede_std_mm));
  row("lod_mm", format_double(m.lod_mm));
  row("distinguishable_at_1_2mm", m.distinguishable_at_1_2mm ? "1" : "0");
}

int cmd_evaluate(const CommonOpts& common, const std::string& pred_path,
                 const std::string& gt_path,
                 const std::vector<std::string>& fold_paths,
                 const std::string& out_csv, const std::string& out_json,
                 const std::string& std_mode) {
  const std::vector<LandmarkSet> preds = load_landmark_table(pred_path);
  const std::vector<LandmarkSet> gts = load_landmark_table(gt_path);

  std::vector<FoldAssignment> groups;
  for (const std::string& fp : fold_paths) {
    const FoldSpec spec = load_fold_spec(fp);
    FoldAssignment group;
    group.fold_id = spec.fold_id;
    for (const LandmarkSet& p : preds) {
      if (std::find(spec.test.begin(), spec.test.end(),
                    participant_of(p.image_id)) != spec.test.end()) {
        group.image_ids.push_back(p.image_id);
      }
    }
    groups.push_back(std::move(group));
  }

  const StdMode mode =
      std_mode == "sample" ? StdMode::sample : StdMode::population;
  const MeasurementReport report =
      evaluate_dataset(preds, gts, common.cfg.scale, groups, 0, 1, mode);

  std::string csv = "fold,metric,value\n";
  for (const FoldMeasurement& m : report.folds) append_fold_csv(csv, m);
  append_fold_csv(csv, report.overall);
  if (!out_csv.empty()) write_text(out_csv, csv);

  nlohmann::ordered_json j;
  j["folds"] = nlohmann::ordered_json::array();
  for (const FoldMeasurement& m : report.folds) {
    j["folds"].push_back(fold_to_json(m));
  }
  j["overall"] = fold_to_json(report.overall);
  j["per_sample_length_mm"] = report.per_sample_length_mm;
  if (!out_json.empty()) write_text(out_json, j.dump(2));
  if (out_csv.empty() && out_json.empty()) {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

HarnessConfig harness_from_json(const nlohmann::json& j) {
  HarnessConfig cfg;
  cfg.landmark_template = HarnessConfig::default_template();
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    }
  };
  get("jitter_sigma", cfg.jitter_sigma);
  get("gaussian_sigma", cfg.gaussian_sigma);
  get("spurious_rate", cfg.spurious_rate);
  get("spurious_offset_min", cfg.spurious_offset_min);
  get("spurious_offset_max", cfg.spurious_offset_max);
  get("spurious_value_ratio", cfg.spurious_value_ratio);
  get("image_width", cfg.image_width);
  get("image_height", cfg.image_height);
  get("heatmap_width", cfg.heatmap_width);
  get("heatmap_height", cfg.heatmap_height);
  get("train_count", cfg.train_count);
  get("test_count", cfg.test_count);
  get("translation_range", cfg.translation_range);
  get("rotation_range", cfg.rotation_range);
  get("scale_min", cfg.scale_min);
  get("scale_max", cfg.scale_max);
  get("bank_fraction", cfg.bank_fraction);
  get("mm_per_pixel", cfg.mm_per_pixel);
  get("rng_seed", cfg.rng_seed);
  if (j.contains("landmark_template")) {
    cfg.landmark_template.clear();
    for (const auto& pt : j.at("landmark_template")) {
      cfg.landmark_template.push_back(
          {pt.at(0).get<double>(), pt.at(1).get<double>()});
    }
  }
  return cfg;
}

int cmd_simulate(const CommonOpts& common, std::vector<double> rho_grid,
                 int images, int train, std::uint64_t seed, bool seed_set,
                 const std::string& out_csv, const std::string& out_json,
                 const std::string& dump_dir) {
  HarnessConfig harness;
  harness.landmark_template = HarnessConfig::default_template();
  if (!common.config_path.empty()) {
    const nlohmann::json j = parse_json_file(common.config_path, "config");
    if (j.contains("harness")) {
      try {
        harness = harness_from_json(j.at("harness"));
      } catch (const nlohmann::json::exception&) {
        raise(ErrorCode::invalid_config, "bad harness section in config");
      }
    }
  }
  if (images > 0) harness.test_count = images;
  if (train > 0) harness.train_count = train;
  if (seed_set) harness.rng_seed = seed;
  if (rho_grid.empty()) rho_grid = {0.0, 0.1, 0.3, 0.6};

  const ExperimentTable table =
      run_experiment(harness, rho_grid, common.cfg.decode);
  if (!out_csv.empty()) write_text(out_csv, experiment_table_to_csv(table));
  if (!out_json.empty()) write_text(out_json, experiment_table_to_json(table));
  if (out_csv.empty() && out_json.empty()) {
    std::cout << experiment_table_to_csv(table);
  }

  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    for (const double rho : rho_grid) {
      HarnessConfig run = harness;
      run.spurious_rate = rho;
      std::mt19937_64 rng =
          harness_stream(run.rng_seed, static_cast<std::uint64_t>(run.train_count));
      const LandmarkSet gt = sample_landmark_instance(run, rng, "img_0");
      const InjectionResult injected =
          inject_spurious_peaks(render_heatmaps(gt, run), gt, run, rng);
      save_heatmaps(fs::path(dump_dir) /
                        ("rho_" + format_double(rho) + "_img_0.hmt"),
                    injected.heatmaps);
    }
  }
  return 0;
}

int cmd_prompts(const std::string& landmarks_path, const std::string& out_path,
                const std::string& out_dir) {
  const std::vector<LandmarkSet> sets = load_landmark_table(landmarks_path);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
  } else if (sets.size() != 1) {
    raise(ErrorCode::invalid_config,
          "--out handles a single image; use --out-dir for " +
              std::to_string(sets.size()) + " images");
  }
  for (const LandmarkSet& lm : sets) {
    const PromptSet prompts = generate_prompts(lm);
    if (prompts.duplicate_negative) {
      std::cerr << "warning: " << lm.image_id
                << ": negative prompt (x4, y3) is emitted twice\n";
    }
    const fs::path target = out_dir.empty()
                                ? fs::path(out_path)
                                : fs::path(out_dir) / (lm.image_id + ".json");
    write_text(target, prompt_set_to_json(prompts) + "\n");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Landmark heatmap decoding, shape-subspace refinement, and "
               "joint-space measurement"};
  app.require_subcommand(1);

  CommonOpts common;
  int exit_code = 0;

  // refine
  auto* refine = app.add_subcommand(
      "refine", "Decode heatmaps into landmark coordinates, optionally "
                "refined against a reference shape bank");
  std::vector<std::string> heatmap_args;
  std::string reference_path;
  std::string refine_out;
  int img_width = 0;
  int img_height = 0;
  bool no_ssr = false;
  refine->add_option("--heatmaps", heatmap_args,
                     ".hmt files or directories of them")
      ->required();
  refine->add_option("--reference", reference_path,
                     "training landmark CSV for the reference bank");
  refine->add_option("--out", refine_out, "output landmark CSV")->required();
  refine->add_option("--image-width", img_width, "target image width (px)")
      ->required();
  refine->add_option("--image-height", img_height, "target image height (px)")
      ->required();
  refine->add_flag("--no-ssr", no_ssr, "plain argmax decoding only");
  refine->add_option("--config", common.config_path, "run-config JSON");
  auto* refine_r = refine->add_option("--value-threshold",
                                      common.cfg.decode.value_threshold,
                                      "candidate threshold r in (0,1]");
  auto* refine_d = refine->add_option("--min-distance",
                                      common.cfg.decode.min_distance,
                                      "suppression radius D (heatmap px)");
  auto* refine_k = refine->add_option("--max-candidates",
                                      common.cfg.decode.max_candidates,
                                      "candidate cap per landmark");
  auto* refine_f = refine->add_option("--fraction", common.cfg.ssr.fraction,
                                      "fraction of reference shapes sampled");
  auto* refine_s =
      refine->add_option("--seed", common.cfg.ssr.seed, "bank sampling seed");
  auto* refine_b = refine->add_option("--budget", common.cfg.ssr.budget,
                                      "combination budget");
  refine->callback([&] {
    const double r = common.cfg.decode.value_threshold;
    const double d = common.cfg.decode.min_distance;
    const int k = common.cfg.decode.max_candidates;
    const double f = common.cfg.ssr.fraction;
    const std::uint64_t s = common.cfg.ssr.seed;
    const std::uint64_t b = common.cfg.ssr.budget;
    common.load();
    if (refine_r->count()) common.cfg.decode.value_threshold = r;
    if (refine_d->count()) common.cfg.decode.min_distance = d;
    if (refine_k->count()) common.cfg.decode.max_candidates = k;
    if (refine_f->count()) common.cfg.ssr.fraction = f;
    if (refine_s->count()) common.cfg.ssr.seed = s;
    if (refine_b->count()) common.cfg.ssr.budget = b;
    common.cfg.decode.validate();
    exit_code = cmd_refine(common, heatmap_args, reference_path, refine_out,
                           img_width, img_height, no_ssr);
  });

  // measure
  auto* measure = app.add_subcommand(
      "measure", "Joint-space length per image from a landmark CSV");
  std::string measure_landmarks;
  std::string measure_out;
  measure->add_option("--landmarks", measure_landmarks, "landmark CSV")
      ->required();
  measure->add_option("--out", measure_out, "output CSV")->required();
  measure->add_option("--config", common.config_path, "run-config JSON");
  auto* measure_mm = measure->add_option(
      "--mm-per-pixel", common.cfg.scale.mm_per_pixel, "pixel pitch in mm");
  measure->callback([&] {
    const double mm = common.cfg.scale.mm_per_pixel;
    common.load();
    if (measure_mm->count()) common.cfg.scale.mm_per_pixel = mm;
    common.cfg.scale.validate();
    exit_code = cmd_measure(common, measure_landmarks, measure_out);
  });

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Compare predicted landmarks against ground truth");
  std::string pred_path;
  std::string gt_path;
  std::vector<std::string> fold_paths;
  std::string eval_out_csv;
  std::string eval_out_json;
  std::string std_mode = "population";
  evaluate->add_option("--pred", pred_path, "prediction CSV")->required();
  evaluate->add_option("--gt", gt_path, "ground-truth CSV")->required();
  evaluate->add_option("--folds", fold_paths, "fold-spec JSON files");
  evaluate->add_option("--out-csv", eval_out_csv, "report CSV path");
  evaluate->add_option("--out-json", eval_out_json, "report JSON path");
  evaluate->add_option("--std", std_mode, "population or sample std")
      ->check(CLI::IsMember({"population", "sample"}));
  evaluate->add_option("--config", common.config_path, "run-config JSON");
  auto* eval_mm = evaluate->add_option(
      "--mm-per-pixel", common.cfg.scale.mm_per_pixel, "pixel pitch in mm");
  evaluate->callback([&] {
    const double mm = common.cfg.scale.mm_per_pixel;
    common.load();
    if (eval_mm->count()) common.cfg.scale.mm_per_pixel = mm;
    common.cfg.scale.validate();
    exit_code = cmd_evaluate(common, pred_path, gt_path, fold_paths,
                             eval_out_csv, eval_out_json, std_mode);
  });

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Synthetic spurious-peak sweep comparing plain and "
                  "refined pipelines");
  std::vector<double> rho_grid;
  int sim_images = 0;
  int sim_train = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out_csv;
  std::string sim_out_json;
  std::string dump_dir;
  simulate->add_option("--rho", rho_grid,
                       "spurious-peak rates (default 0 0.1 0.3 0.6)");
  simulate->add_option("--images", sim_images, "test images per rate");
  simulate->add_option("--train", sim_train, "training shapes for the bank");
  auto* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "experiment seed");
  simulate->add_option("--out-csv", sim_out_csv, "experiment CSV path");
  simulate->add_option("--out-json", sim_out_json, "summary JSON path");
  simulate->add_option("--dump-heatmaps", dump_dir,
                       "directory for one debug .hmt per rate");
  simulate->add_option("--config", common.config_path,
                       "run-config JSON (harness section)");
  simulate->callback([&] {
    common.load();
    exit_code = cmd_simulate(common, rho_grid, sim_images, sim_train, sim_seed,
                             sim_seed_opt->count() > 0, sim_out_csv,
                             sim_out_json, dump_dir);
  });

  // prompts
  auto* prompts = app.add_subcommand(
      "prompts", "Segmentation point prompts from an eight-landmark CSV");
  std::string prompts_landmarks;
  std::string prompts_out;
  std::string prompts_out_dir;
  prompts->add_option("--landmarks", prompts_landmarks, "landmark CSV")
      ->required();
  prompts->add_option("--out", prompts_out, "output JSON (single image)");
  prompts->add_option("--out-dir", prompts_out_dir,
                      "output directory (one JSON per image)");
  prompts->callback([&] {
    if (prompts_out.empty() == prompts_out_dir.empty()) {
      raise(ErrorCode::invalid_config,
            "exactly one of --out and --out-dir is required");
    }
    exit_code = cmd_prompts(prompts_landmarks, prompts_out, prompts_out_dir);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what()
              << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace jspace
