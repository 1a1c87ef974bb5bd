#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/evaluator.hpp"
#include "geoweak/geocluster.hpp"
#include "geoweak/geometry.hpp"
#include "geoweak/parsers.hpp"
#include "geoweak/report.hpp"
#include "geoweak/rng.hpp"
#include "geoweak/splitter.hpp"
#include "geoweak/teachersim.hpp"

namespace geoweak {

// ---------------------------------------------------------------------------
// Synthetic corpus generation: a desk-scale stand-in with planted farms,
// country tags and per-box geographic source points. Deterministic for a
// fixed seed.
// ---------------------------------------------------------------------------

struct SynthParams {
  std::size_t n_images = 500;
  int objects_min = 1;
  int objects_max = 4;
  int n_classes = 1;
  int n_countries = 3;
  std::size_t n_farms = 25;
  double farm_spread_m = 500.0;
  int image_width = 416;
  int image_height = 416;
  std::uint64_t seed = 0;
};

struct SynthResult {
  Dataset dataset;
  std::vector<PointEntry> points;  // geo points in extract_geo_points order
};

inline SynthResult generate_synthetic(const SynthParams& p) {
  if (p.n_images == 0 || p.n_classes < 1 || p.n_countries < 1 ||
      p.n_farms == 0 || !(p.farm_spread_m > 0.0) || p.image_width < 8 ||
      p.image_height < 8) {
    throw validation_error("synth: sizes must be positive");
  }
  if (p.objects_min < 0 || p.objects_max < p.objects_min) {
    throw validation_error("synth: bad objects_per_image range");
  }

  SynthResult result;
  Dataset& d = result.dataset;
  for (int c = 0; c < p.n_classes; ++c) {
    d.class_table.entries.push_back({c, "class_" + std::to_string(c)});
  }

  auto country_code = [](int c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "C%02d", c);
    return std::string(buf);
  };
  const double band = 300.0 / p.n_countries;

  // Farm centers sit on a coarse grid, hundreds of km apart, so planted
  // farms never merge under any sensible eps.
  struct Farm {
    int country;
    GeoPoint center;
  };
  std::vector<Farm> farms;
  for (std::size_t f = 0; f < p.n_farms; ++f) {
    const int c = static_cast<int>(f % p.n_countries);
    const auto slot = f / p.n_countries;
    Farm farm;
    farm.country = c;
    farm.center.lat = -50.0 + 2.0 * static_cast<double>(slot % 51);
    farm.center.lon = -150.0 + (c + 0.5) * band +
                      1.0 * static_cast<double>(slot / 51);
    farms.push_back(farm);
  }

  Rng rng(p.seed);
  std::int64_t next_ann_id = 0;
  const double meters_per_degree = 111320.0;

  for (std::size_t i = 0; i < p.n_images; ++i) {
    const Farm& farm = farms[i % p.n_farms];
    ImageRecord img;
    img.image_id = static_cast<std::int64_t>(i);
    img.width = p.image_width;
    img.height = p.image_height;
    img.country = country_code(farm.country);
    img.centroid_geo = farm.center;

    const int k = p.objects_min +
                  static_cast<int>(rng.below(
                      static_cast<std::uint64_t>(p.objects_max - p.objects_min + 1)));
    std::vector<BBox> placed;
    for (int obj = 0; obj < k; ++obj) {
      const int max_w = std::min(64, p.image_width);
      const int max_h = std::min(64, p.image_height);
      BBox box;
      bool ok = false;
      for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        const int w = 16 + static_cast<int>(rng.below(
                               static_cast<std::uint64_t>(max_w - 16 + 1)));
        const int h = 16 + static_cast<int>(rng.below(
                               static_cast<std::uint64_t>(max_h - 16 + 1)));
        const auto x = static_cast<double>(
            rng.below(static_cast<std::uint64_t>(p.image_width - w + 1)));
        const auto y = static_cast<double>(
            rng.below(static_cast<std::uint64_t>(p.image_height - h + 1)));
        box = {x, y, x + w, y + h};
        ok = true;
        for (const auto& other : placed) {
          const bool disjoint = box.xmax <= other.xmin || other.xmax <= box.xmin ||
                                box.ymax <= other.ymin || other.ymax <= box.ymin;
          if (!disjoint) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) {
        throw validation_error("synth: cannot pack " + std::to_string(k) +
                               " objects into " + std::to_string(p.image_width) +
                               "x" + std::to_string(p.image_height) + " image");
      }
      placed.push_back(box);

      Annotation ann;
      ann.id = next_ann_id++;
      ann.class_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(p.n_classes)));
      ann.geometry = box;
      // Turbine base point sits in the central half of the box.
      ann.source_point = PixelPoint{
          box.xmin + box.width() * (0.25 + 0.5 * rng.uniform()),
          box.ymin + box.height() * (0.25 + 0.5 * rng.uniform())};
      const double lat_rad = farm.center.lat * M_PI / 180.0;
      GeoPoint geo;
      geo.lat = farm.center.lat + (rng.uniform() * 2.0 - 1.0) *
                                      (p.farm_spread_m / 2.0) / meters_per_degree;
      geo.lon = farm.center.lon +
                (rng.uniform() * 2.0 - 1.0) * (p.farm_spread_m / 2.0) /
                    (meters_per_degree * std::cos(lat_rad));
      ann.source_geo = geo;
      img.annotations.push_back(std::move(ann));

      PointEntry entry;
      entry.location = geo;
      entry.class_id = img.annotations.back().class_id;
      result.points.push_back(std::move(entry));
    }
    d.images.push_back(std::move(img));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Region rules file: {"rules":[{"split":"train","countries":["US"],
// "lon_max":-98.58}, ..., {"split":"test","rest":true}]}
// ---------------------------------------------------------------------------

inline std::vector<RegionRule> parse_region_rules(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    throw format_error("region rules: expected top-level 'rules' list");
  }
  std::vector<RegionRule> rules;
  std::size_t idx = 0;
  try {
    for (const auto& r : doc["rules"]) {
      const std::string ctx = "region rule " + std::to_string(idx++);
      RegionRule rule;
      const auto split = split_from_string(r.at("split").get<std::string>());
      if (!split) throw format_error(ctx + ": unknown split name");
      rule.split = *split;
      for (const auto& [key, value] : r.items()) {
        if (key == "split") {
          continue;
        } else if (key == "countries") {
          rule.countries = value.get<std::vector<std::string>>();
        } else if (key == "exclude_countries") {
          rule.exclude_countries = value.get<std::vector<std::string>>();
        } else if (key == "lon_min") {
          rule.lon_min = value.get<double>();
        } else if (key == "lon_max") {
          rule.lon_max = value.get<double>();
        } else if (key == "rest") {
          rule.rest = value.get<bool>();
        } else {
          throw format_error(ctx + ": unknown key '" + key + "'");
        }
      }
      rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("region rules: " + std::string(e.what()));
  }
  return rules;
}

inline std::vector<RegionRule> load_region_rules(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_region_rules(detail::parse_json_stream(in, "region rules"));
}

// ---------------------------------------------------------------------------
// Experiment configuration: a flat json document; unknown keys are errors.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::filesystem::path dataset_path;
  std::optional<std::filesystem::path> predictions_path;
  std::string split_strategy = "cluster-random";  // or "region"
  SplitRatios ratios;
  std::optional<std::filesystem::path> region_rules_path;
  double eps_m = 2000.0;
  int min_pts = 3;
  std::vector<double> fractions = {0.01, 0.05, 0.10};
  WeakSource weak_source = WeakSource::box_center;
  NoiseModel noise;
  EvalConfig eval;
  std::uint64_t seed = 0;
  // Default output location; a CLI --out-dir overrides it. Not part of the
  // config hash: where results land does not change what the run computes.
  std::optional<std::filesystem::path> out_dir;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty()) {
    throw validation_error("config: dataset path required");
  }
  if (cfg.split_strategy != "cluster-random" && cfg.split_strategy != "region") {
    throw validation_error("config: split_strategy must be cluster-random or region");
  }
  if (cfg.split_strategy == "region" && !cfg.region_rules_path) {
    throw validation_error("config: region strategy requires region_rules");
  }
  if (cfg.fractions.empty()) {
    throw validation_error("config: at least one fraction required");
  }
  double prev = 0.0;
  for (double f : cfg.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw validation_error("config: fractions must lie in (0,1]");
    }
    if (!(f > prev)) {
      throw validation_error("config: fractions must be strictly increasing");
    }
    prev = f;
  }
  validate(cfg.noise);
  validate(cfg.eval);
}

inline ExperimentConfig parse_experiment_config(const nlohmann::ordered_json& doc,
                                                const std::filesystem::path& base_dir) {
  if (!doc.is_object()) {
    throw format_error("config: expected a json object");
  }
  ExperimentConfig cfg;
  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "dataset") {
        cfg.dataset_path = resolve(value.get<std::string>());
      } else if (key == "predictions") {
        cfg.predictions_path = resolve(value.get<std::string>());
      } else if (key == "split_strategy") {
        cfg.split_strategy = value.get<std::string>();
      } else if (key == "train_ratio") {
        cfg.ratios.train = value.get<double>();
      } else if (key == "val_ratio") {
        cfg.ratios.val = value.get<double>();
      } else if (key == "test_ratio") {
        cfg.ratios.test = value.get<double>();
      } else if (key == "region_rules") {
        cfg.region_rules_path = resolve(value.get<std::string>());
      } else if (key == "eps_m") {
        cfg.eps_m = value.get<double>();
      } else if (key == "min_pts") {
        cfg.min_pts = value.get<int>();
      } else if (key == "fractions") {
        cfg.fractions = value.get<std::vector<double>>();
      } else if (key == "weak_source") {
        const std::string s = value.get<std::string>();
        if (s == "box_center") {
          cfg.weak_source = WeakSource::box_center;
        } else if (s == "source_point") {
          cfg.weak_source = WeakSource::source_point;
        } else {
          throw validation_error("config: weak_source must be box_center or source_point");
        }
      } else if (key == "center_sigma") {
        cfg.noise.center_jitter_sigma = value.get<double>();
      } else if (key == "scale_sigma") {
        cfg.noise.scale_jitter_sigma = value.get<double>();
      } else if (key == "drop_rate") {
        cfg.noise.drop_rate = value.get<double>();
      } else if (key == "score_alpha") {
        cfg.noise.score_alpha = value.get<double>();
      } else if (key == "score_beta") {
        cfg.noise.score_beta = value.get<double>();
      } else if (key == "iou_thresholds") {
        cfg.eval.iou_thresholds = value.get<std::vector<double>>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "out_dir") {
        cfg.out_dir = resolve(value.get<std::string>());
      } else {
        throw validation_error("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("config: " + std::string(e.what()));
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto doc = detail::parse_json_stream(in, "config");
  return parse_experiment_config(doc, path.parent_path());
}

// FNV-1a over the resolved config fields; identifies a run without pulling
// wall-clock into the emitted artifacts.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::string canon = cfg.dataset_path.string() + "|" +
                      (cfg.predictions_path ? cfg.predictions_path->string() : "") +
                      "|" + cfg.split_strategy + "|";
  char buf[64];
  auto add = [&canon, &buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    canon += buf;
  };
  add(cfg.ratios.train);
  add(cfg.ratios.val);
  add(cfg.ratios.test);
  add(cfg.eps_m);
  canon += std::to_string(cfg.min_pts) + "|";
  for (double f : cfg.fractions) add(f);
  canon += cfg.weak_source == WeakSource::box_center ? "center|" : "point|";
  add(cfg.noise.center_jitter_sigma);
  add(cfg.noise.scale_jitter_sigma);
  add(cfg.noise.drop_rate);
  add(cfg.noise.score_alpha);
  add(cfg.noise.score_beta);
  for (double t : cfg.eval.iou_thresholds) add(t);
  canon += std::to_string(cfg.seed);

  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : canon) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment run
// ---------------------------------------------------------------------------

struct FractionOutcome {
  double fraction = 0.0;
  std::size_t strong_count = 0;
  std::size_t weak_count = 0;
  std::size_t pseudo_count = 0;
  EvalResult baseline;  // strong-only supervision scored against train truth
  EvalResult wssod;     // strong + pseudo supervision against train truth
  EvalResult teacher;   // pseudo boxes against the weak images' hidden truth
};

struct RunRecord {
  std::string config_hash;
  std::vector<double> thresholds;
  std::vector<FractionOutcome> fractions;
  // Wall-clock stays in memory: emitted trees must be byte-identical for a
  // fixed (config, seed).
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
};

inline std::vector<Detection> detections_from_boxes(const Dataset& d,
                                                    double default_score) {
  std::vector<Detection> dets;
  for (const auto& img : d.images) {
    for (const auto& ann : img.annotations) {
      if (!ann.has_box()) continue;
      dets.push_back({img.image_id, ann.class_id, ann.box(),
                      ann.score.value_or(default_score)});
    }
  }
  return dets;
}

inline json eval_result_to_json(const EvalResult& r) {
  json doc;
  doc["thresholds"] = r.thresholds;
  doc["single_class"] = r.single_class;
  doc["classes"] = json::array();
  for (std::size_t c = 0; c < r.class_ids.size(); ++c) {
    json cls;
    cls["class_id"] = r.class_ids[c];
    cls["per_threshold"] = json::array();
    for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
      const EvalCell& cell = r.cells[c][t];
      json entry;
      entry["threshold"] = r.thresholds[t];
      entry["ap"] = cell.ap ? json(*cell.ap) : json(nullptr);
      entry["tp"] = cell.counts.tp;
      entry["fp"] = cell.counts.fp;
      entry["fn"] = cell.counts.fn;
      cls["per_threshold"].push_back(std::move(entry));
    }
    doc["classes"].push_back(std::move(cls));
  }
  doc["map"] = json::array();
  for (const auto& m : r.map_per_threshold) {
    doc["map"].push_back(m ? json(*m) : json(nullptr));
  }
  return doc;
}

inline std::string fraction_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", f * 100.0);
  return buf;
}

inline std::string fraction_dir_name(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fraction_%g", f);
  return buf;
}

namespace detail {

template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const error& e) {
    switch (e.kind()) {
      case ErrorKind::validation:
        throw validation_error(std::string("stage ") + stage + ": " + e.what());
      case ErrorKind::format:
        throw format_error(std::string("stage ") + stage + ": " + e.what());
      case ErrorKind::io:
        throw io_error(std::string("stage ") + stage + ": " + e.what());
    }
    throw;
  }
}

inline Dataset subset_by_ids(const Dataset& d, const std::set<std::int64_t>& ids) {
  Dataset out;
  out.class_table = d.class_table;
  for (const auto& img : d.images) {
    if (ids.count(img.image_id)) out.images.push_back(img);
  }
  return out;
}

}  // namespace detail

// Orchestrates the pipeline around the external training boundary: cluster
// when needed, split, then per fraction sample label modes, derive weak
// labels, pseudo-label (simulated teacher or supplied predictions), merge,
// export, and score the supervision each arm would train on. Fully
// deterministic for a fixed config and seed.
inline RunRecord run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir) {
  validate(cfg);
  RunRecord record;
  record.started = std::chrono::system_clock::now();
  record.config_hash = config_hash(cfg);
  record.thresholds = cfg.eval.iou_thresholds;

  std::filesystem::create_directories(out_dir);

  Dataset d = detail::with_stage("ingest", [&] {
    auto parsed = load_detection_dataset(cfg.dataset_path, ParseMode::strict);
    const auto report = validate_dataset(parsed.dataset);
    if (!report.ok()) {
      throw validation_error("dataset has " +
                             std::to_string(report.violations.size()) +
                             " validation violations; first: " +
                             report.violations.front().message);
    }
    return std::move(parsed.dataset);
  });

  const bool needs_clusters =
      std::any_of(d.images.begin(), d.images.end(),
                  [](const ImageRecord& img) { return !img.cluster_id; });
  if (needs_clusters) {
    d = detail::with_stage("cluster", [&] {
      const auto refs = extract_geo_points(d);
      std::vector<GeoPoint> points;
      points.reserve(refs.size());
      for (const auto& r : refs) points.push_back(r.geo);
      const auto assignment = dbscan(points, {cfg.eps_m, cfg.min_pts});
      return assign_clusters_to_images(d, assignment).first;
    });
  }

  const SplitAssignment split = detail::with_stage("split", [&] {
    if (cfg.split_strategy == "region") {
      return split_by_region(d, load_region_rules(*cfg.region_rules_path))
          .assignment;
    }
    return split_random_by_cluster(d, cfg.ratios, mix_seed(cfg.seed, 17));
  });
  {
    auto out = open_output(out_dir / "split.csv");
    write_split_manifest(split, out);
  }

  std::set<std::int64_t> train_ids;
  for (const auto& [id, s] : split.by_image) {
    if (s == Split::train) train_ids.insert(id);
  }
  const Dataset train_truth = detail::subset_by_ids(d, train_ids);

  std::optional<std::vector<Detection>> external_preds;
  if (cfg.predictions_path) {
    external_preds = detail::with_stage(
        "predictions", [&] { return load_predictions(*cfg.predictions_path); });
  }

  for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
    const double f = cfg.fractions[i];
    const std::uint64_t arm_seed = mix_seed(cfg.seed, 1000 + i);
    const auto fraction_dir = out_dir / fraction_dir_name(f);

    FractionOutcome outcome;
    outcome.fraction = f;

    const LabelModeAssignment modes = detail::with_stage("fractions", [&] {
      return sample_label_fractions(d, split, f, arm_seed);
    });

    std::set<std::int64_t> strong_ids, weak_ids;
    for (const auto& [id, m] : modes.by_image) {
      (m == LabelMode::strong ? strong_ids : weak_ids).insert(id);
    }
    outcome.strong_count = strong_ids.size();
    outcome.weak_count = weak_ids.size();

    detail::with_stage("export", [&] {
      const Dataset derived = derive_weak_labels(d, modes, cfg.weak_source);
      return export_artifacts(derived, split, modes, fraction_dir);
    });

    const Dataset weak_truth = detail::subset_by_ids(d, weak_ids);
    const Dataset strong_subset = detail::subset_by_ids(d, strong_ids);

    const Dataset pseudo = detail::with_stage("pseudolabel", [&] {
      if (external_preds) {
        Dataset out;
        out.class_table = d.class_table;
        std::int64_t next_id = 0;
        for (const auto& img : weak_truth.images) {
          ImageRecord rec = img;
          rec.annotations.clear();
          for (const auto& det : *external_preds) {
            if (det.image_id != img.image_id) continue;
            Annotation ann;
            ann.id = next_id++;
            ann.class_id = det.class_id;
            ann.geometry = detail::clamp_to_image(det.box, rec.width, rec.height);
            ann.score = det.score;
            ann.provenance = Provenance::pseudo;
            rec.annotations.push_back(std::move(ann));
          }
          out.images.push_back(std::move(rec));
        }
        return out;
      }
      return simulate_pseudo_labels(weak_truth, cfg.noise, mix_seed(arm_seed, 1));
    });
    save_detection_dataset(pseudo, fraction_dir / "pseudo.json");
    for (const auto& img : pseudo.images) {
      outcome.pseudo_count += img.annotations.size();
    }

    const Dataset student = detail::with_stage(
        "merge", [&] { return merge_strong_and_pseudo(strong_subset, pseudo); });
    save_detection_dataset(student, fraction_dir / "student_corpus.json");

    detail::with_stage("evaluate", [&] {
      const auto strong_dets = detections_from_boxes(strong_subset, 1.0);
      outcome.baseline = evaluate(strong_dets, train_truth, cfg.eval);

      auto wssod_dets = strong_dets;
      const auto pseudo_dets = detections_from_boxes(pseudo, 1.0);
      wssod_dets.insert(wssod_dets.end(), pseudo_dets.begin(), pseudo_dets.end());
      outcome.wssod = evaluate(wssod_dets, train_truth, cfg.eval);

      outcome.teacher = evaluate(pseudo_dets, weak_truth, cfg.eval);
      return 0;
    });

    {
      auto out = open_output(fraction_dir / "eval_baseline.json");
      out << eval_result_to_json(outcome.baseline).dump(2) << "\n";
    }
    {
      auto out = open_output(fraction_dir / "eval_wssod.json");
      out << eval_result_to_json(outcome.wssod).dump(2) << "\n";
    }
    {
      auto out = open_output(fraction_dir / "eval_teacher.json");
      out << eval_result_to_json(outcome.teacher).dump(2) << "\n";
    }
    record.fractions.push_back(std::move(outcome));
  }

  // Run record + rendered report.
  json rec;
  rec["config_hash"] = record.config_hash;
  rec["thresholds"] = record.thresholds;
  rec["fractions"] = json::array();
  for (const auto& outcome : record.fractions) {
    json fr;
    fr["fraction"] = outcome.fraction;
    fr["strong"] = outcome.strong_count;
    fr["weak"] = outcome.weak_count;
    fr["pseudo"] = outcome.pseudo_count;
    fr["baseline"] = eval_result_to_json(outcome.baseline);
    fr["wssod"] = eval_result_to_json(outcome.wssod);
    fr["teacher"] = eval_result_to_json(outcome.teacher);
    rec["fractions"].push_back(std::move(fr));
  }
  {
    auto out = open_output(out_dir / "run_record.json");
    out << rec.dump(2) << "\n";
  }

  ReportInput report;
  report.thresholds = record.thresholds;
  ReportGroup group;
  group.dataset = cfg.dataset_path.stem().string();
  for (const auto& outcome : record.fractions) {
    ReportRow row;
    row.fraction = fraction_label(outcome.fraction);
    auto values = [](const EvalResult& r) {
      std::vector<double> v;
      for (const auto& m : r.map_per_threshold) v.push_back(m.value_or(0.0));
      return v;
    };
    row.arms["baseline"] = values(outcome.baseline);
    row.arms["wssod"] = values(outcome.wssod);
    row.arms["teacher"] = values(outcome.teacher);
    group.rows.push_back(std::move(row));
  }
  report.groups.push_back(std::move(group));
  const auto rendered = render_report(report);
  {
    auto out = open_output(out_dir / "report.txt");
    out << rendered.table_text;
  }
  {
    auto out = open_output(out_dir / "report.csv");
    out << rendered.csv_text;
  }

  record.finished = std::chrono::system_clock::now();
  return record;
}

}  // namespace geoweak
