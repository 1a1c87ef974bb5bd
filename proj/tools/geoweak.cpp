// geoweak: annotation pipeline CLI for weakly-semi-supervised detection
// experiments. Subcommands mirror the pipeline stages; exit codes: 0 ok,
// 1 validation error, 2 format or I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoweak/geoweak.hpp"

namespace fs = std::filesystem;
using namespace geoweak;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool lenient = false;
};

ParseMode mode_of(const GlobalOpts& g) {
  return g.lenient ? ParseMode::lenient : ParseMode::strict;
}

SplitRatios parse_ratios(const std::string& text) {
  SplitRatios r;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &r.train, &r.val, &r.test) != 3) {
    throw validation_error("ratios must be 'train,val,test'");
  }
  return r;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw validation_error("bad number '" + item + "' in list");
    }
  }
  return out;
}

void cmd_ingest(const GlobalOpts& g, const std::string& input,
                const std::string& output, bool fair1m, double max_dim,
                std::size_t max_annotations, bool retention,
                const std::string& emit_points) {
  auto parsed = load_detection_dataset(input, mode_of(g));
  Dataset d = std::move(parsed.dataset);
  std::cout << "parsed " << d.images.size() << " images ("
            << parsed.dropped_records << " dropped, " << parsed.clamped_boxes
            << " boxes clamped)\n";

  if (fair1m) {
    auto [kept, dropped] = filter_fair1m(d, max_dim, max_annotations);
    std::cout << "fair1m filter dropped " << dropped << " images\n";
    d = std::move(kept);
  }
  if (retention) {
    auto [kept, report] = retention_filter(d);
    std::cout << "retention filter dropped " << report.dropped_images
              << " images and " << report.dropped_points << " orphan points\n";
    d = std::move(kept);
  }

  const auto report = validate_dataset(d);
  std::cout << "images " << report.image_count << ", boxes " << report.box_count
            << ", points " << report.point_count << ", violations "
            << report.violations.size() << "\n";
  for (const auto& v : report.violations) {
    std::cerr << "violation [" << v.kind << "] " << v.message << "\n";
  }

  if (!output.empty()) save_detection_dataset(d, output);
  if (!emit_points.empty()) {
    std::vector<PointEntry> points;
    for (const auto& ref : extract_geo_points(d)) {
      PointEntry e;
      e.location = ref.geo;
      e.class_id = d.images[ref.image_index].annotations[ref.annotation_index].class_id;
      points.push_back(std::move(e));
    }
    auto out = open_output(emit_points);
    write_point_collection(points, out);
    std::cout << "wrote " << points.size() << " geo points\n";
  }
  if (!report.ok()) throw validation_error("dataset has violations");
}

void cmd_cluster(const std::string& points_path, const std::string& dataset_path,
                 double eps_m, int min_pts, const std::string& manifest_out,
                 const std::string& dataset_out) {
  const DbscanParams params{eps_m, min_pts};
  if (!points_path.empty() && !dataset_path.empty()) {
    throw validation_error("give either --points or --dataset, not both");
  }
  if (!points_path.empty()) {
    const auto entries = load_point_collection(points_path);
    std::vector<GeoPoint> pts;
    for (const auto& e : entries) {
      if (!e.is_geo()) {
        throw validation_error("clustering needs geographic points");
      }
      pts.push_back(e.geo());
    }
    const auto assignment = dbscan(pts, params);
    auto out = open_output(manifest_out);
    write_cluster_manifest(assignment, out);
    std::cout << "clustered " << pts.size() << " points into "
              << assignment.cluster_count << " clusters\n";
    return;
  }
  if (dataset_path.empty()) {
    throw validation_error("cluster requires --points or --dataset");
  }
  auto d = load_detection_dataset(dataset_path).dataset;
  const auto refs = extract_geo_points(d);
  std::vector<GeoPoint> pts;
  for (const auto& r : refs) pts.push_back(r.geo);
  const auto assignment = dbscan(pts, params);
  const auto [clustered, report] = assign_clusters_to_images(d, assignment);
  std::cout << "clustered " << pts.size() << " points into "
            << assignment.cluster_count << " clusters ("
            << report.total_clusters - assignment.cluster_count
            << " singletons, " << report.conflicts.size() << " conflicts)\n";
  if (!manifest_out.empty()) {
    auto out = open_output(manifest_out);
    write_cluster_manifest(assignment, out);
  }
  if (!dataset_out.empty()) save_detection_dataset(clustered, dataset_out);
}

void cmd_split(const GlobalOpts& g, const std::string& dataset_path,
               const std::string& cluster_manifest, const std::string& strategy,
               const std::string& ratios_text, const std::string& rules_path,
               const std::string& out_path, const std::string& dataset_out) {
  auto d = load_detection_dataset(dataset_path).dataset;
  if (!cluster_manifest.empty()) {
    auto in = open_input(cluster_manifest);
    const auto assignment = read_cluster_manifest(in);
    d = assign_clusters_to_images(d, assignment).first;
  }
  SplitAssignment split;
  if (strategy == "cluster-random") {
    split = split_random_by_cluster(d, parse_ratios(ratios_text), g.seed);
  } else if (strategy == "region") {
    if (rules_path.empty()) {
      throw validation_error("region strategy requires --rules");
    }
    const auto result = split_by_region(d, load_region_rules(rules_path));
    for (const auto& fix : result.fixes) {
      std::cerr << "leakage fix: cluster " << fix.cluster_id << " moved to "
                << to_string(fix.moved_to) << "\n";
    }
    split = result.assignment;
  } else {
    throw validation_error("unknown strategy '" + strategy + "'");
  }
  auto out = open_output(out_path);
  write_split_manifest(split, out);
  std::cout << "train " << split.count(Split::train) << ", val "
            << split.count(Split::val) << ", test " << split.count(Split::test)
            << ", teacher_eval " << split.count(Split::teacher_eval) << "\n";
  if (!dataset_out.empty()) save_detection_dataset(d, dataset_out);
}

void cmd_fractions(const GlobalOpts& g, const std::string& dataset_path,
                   const std::string& split_path, double fraction,
                   const std::string& out_path) {
  const auto d = load_detection_dataset(dataset_path).dataset;
  auto in = open_input(split_path);
  const auto split = read_split_manifest(in);
  const auto modes = sample_label_fractions(d, split, fraction, g.seed);
  auto out = open_output(out_path);
  write_label_mode_manifest(modes, out);
  std::size_t strong = 0;
  for (const auto& [id, m] : modes.by_image) strong += (m == LabelMode::strong);
  std::cout << "strong " << strong << ", weak " << (modes.by_image.size() - strong)
            << "\n";
}

void cmd_pseudolabel(const GlobalOpts& g, const std::string& dataset_path,
                     const std::string& modes_path, const NoiseModel& noise,
                     const std::string& out_path) {
  auto d = load_detection_dataset(dataset_path).dataset;
  if (!modes_path.empty()) {
    auto in = open_input(modes_path);
    const auto modes = read_label_mode_manifest(in);
    Dataset weak_only;
    weak_only.class_table = d.class_table;
    for (const auto& img : d.images) {
      auto it = modes.by_image.find(img.image_id);
      if (it != modes.by_image.end() && it->second == LabelMode::weak) {
        weak_only.images.push_back(img);
      }
    }
    d = std::move(weak_only);
  }
  const auto pseudo = simulate_pseudo_labels(d, noise, g.seed);
  save_detection_dataset(pseudo, out_path);
  std::size_t total = 0;
  for (const auto& img : pseudo.images) total += img.annotations.size();
  std::cout << "emitted " << total << " pseudo-boxes over " << pseudo.images.size()
            << " images\n";
}

void cmd_evaluate(const std::string& gt_path, const std::string& preds_path,
                  const std::string& thresholds_text, const std::string& out_path,
                  const std::string& csv_path) {
  const auto gt = load_detection_dataset(gt_path).dataset;
  const auto preds = load_predictions(preds_path);
  EvalConfig cfg;
  if (!thresholds_text.empty()) {
    cfg.iou_thresholds = parse_double_list(thresholds_text);
  }
  const auto result = evaluate(preds, gt, cfg);

  std::ostringstream csv;
  csv << "threshold,class_id,ap,tp,fp,fn\n";
  for (std::size_t t = 0; t < result.thresholds.size(); ++t) {
    for (std::size_t c = 0; c < result.class_ids.size(); ++c) {
      const auto& cell = result.cells[c][t];
      csv << result.thresholds[t] << ',' << result.class_ids[c] << ',';
      if (cell.ap) csv << *cell.ap;
      csv << ',' << cell.counts.tp << ',' << cell.counts.fp << ','
          << cell.counts.fn << "\n";
    }
    csv << result.thresholds[t] << ",mAP,";
    if (result.map_at(t)) csv << *result.map_at(t);
    csv << ",,,\n";
  }
  std::cout << csv.str();
  if (!out_path.empty()) {
    auto out = open_output(out_path);
    out << eval_result_to_json(result).dump(2) << "\n";
  }
  if (!csv_path.empty()) {
    auto out = open_output(csv_path);
    out << csv.str();
  }
}

void cmd_report(const GlobalOpts& g, const std::string& input_path) {
  auto in = open_input(input_path);
  const auto doc = geoweak::detail::parse_json_stream(in, "report input");
  const auto rendered = render_report(report_input_from_json(doc));
  fs::create_directories(g.out_dir);
  {
    auto out = open_output(fs::path(g.out_dir) / "report.txt");
    out << rendered.table_text;
  }
  {
    auto out = open_output(fs::path(g.out_dir) / "report.csv");
    out << rendered.csv_text;
  }
  std::cout << rendered.table_text;
}

void cmd_synth(const GlobalOpts& g, const SynthParams& params) {
  const auto result = generate_synthetic(params);
  fs::create_directories(g.out_dir);
  save_detection_dataset(result.dataset, fs::path(g.out_dir) / "dataset.json");
  {
    auto out = open_output(fs::path(g.out_dir) / "points.geojson");
    write_point_collection(result.points, out);
  }
  std::cout << "wrote " << result.dataset.images.size() << " images and "
            << result.points.size() << " points to " << g.out_dir << "\n";
}

void cmd_run(const GlobalOpts& g, bool seed_given, bool out_dir_given,
             const std::string& config_path, const std::string& predictions) {
  auto cfg = load_experiment_config(config_path);
  if (seed_given) cfg.seed = g.seed;
  if (!predictions.empty()) cfg.predictions_path = predictions;
  const fs::path out_dir =
      (!out_dir_given && cfg.out_dir) ? *cfg.out_dir : fs::path(g.out_dir);
  const auto record = run_experiment(cfg, out_dir);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           record.finished - record.started)
                           .count();
  std::cout << "run " << record.config_hash << ": " << record.fractions.size()
            << " fraction arms in " << elapsed << " ms -> " << out_dir.string() << "\n";
  for (const auto& outcome : record.fractions) {
    std::cout << "  " << fraction_label(outcome.fraction) << ": strong "
              << outcome.strong_count << ", weak " << outcome.weak_count
              << ", pseudo " << outcome.pseudo_count;
    for (std::size_t t = 0; t < record.thresholds.size(); ++t) {
      std::cout << (t == 0 ? " | teacher mAP " : " / ");
      if (outcome.teacher.map_at(t)) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", *outcome.teacher.map_at(t));
        std::cout << buf;
      } else {
        std::cout << "n/a";
      }
    }
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoweak: weakly-semi-supervised detection data pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* seed_opt =
      app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  auto* out_dir_opt =
      app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  bool strict_flag = false;
  auto* lenient_flag =
      app.add_flag("--lenient", g.lenient, "drop malformed records instead of failing");
  app.add_flag("--strict", strict_flag, "fail on the first malformed record (default)")
      ->excludes(lenient_flag);
  std::string config_path;
  app.add_option("--config", config_path, "experiment config file (run)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse, filter and validate a dataset");
  ingest->fallthrough();
  std::string in_path, out_path, emit_points;
  bool fair1m = false, retention = false;
  double max_dim = 2000.0;
  std::size_t max_annotations = 100;
  ingest->add_option("--input", in_path, "dataset file")->required();
  ingest->add_option("--out", out_path, "normalized dataset output");
  ingest->add_flag("--fair1m-filter", fair1m, "apply the resolution/annotation-count filter");
  ingest->add_option("--max-dim", max_dim, "filter: max width/height")->capture_default_str();
  ingest->add_option("--max-annotations", max_annotations, "filter: max annotations per image")->capture_default_str();
  ingest->add_flag("--retention", retention, "keep only images with a (box, point) containment pair");
  ingest->add_option("--emit-points", emit_points, "write geo source points for clustering");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "DBSCAN over haversine distance");
  cluster->fallthrough();
  std::string points_path, cluster_dataset, cluster_manifest = "clusters.csv",
              cluster_dataset_out;
  double eps_m = 2000.0;
  int min_pts = 3;
  cluster->add_option("--points", points_path, "point collection file");
  cluster->add_option("--dataset", cluster_dataset, "dataset file (clusters its geo annotations)");
  cluster->add_option("--eps-m", eps_m, "neighborhood radius in meters")->capture_default_str();
  cluster->add_option("--min-pts", min_pts, "minimum cluster size")->capture_default_str();
  cluster->add_option("--out", cluster_manifest, "cluster manifest output")->capture_default_str();
  cluster->add_option("--write-dataset", cluster_dataset_out, "dataset output with cluster ids");

  // split
  auto* split = app.add_subcommand("split", "leakage-free split assignment");
  split->fallthrough();
  std::string split_dataset, split_clusters, strategy = "cluster-random",
              ratios_text = "0.7,0.15,0.15", rules_path, split_out = "split.csv",
              split_dataset_out;
  split->add_option("--dataset", split_dataset, "dataset file")->required();
  split->add_option("--cluster-manifest", split_clusters, "join cluster ids from a manifest");
  split->add_option("--strategy", strategy, "cluster-random | region")->capture_default_str();
  split->add_option("--ratios", ratios_text, "train,val,test ratios")->capture_default_str();
  split->add_option("--rules", rules_path, "region rules file");
  split->add_option("--out", split_out, "split manifest output")->capture_default_str();
  split->add_option("--write-dataset", split_dataset_out, "dataset output with cluster ids joined");

  // fractions
  auto* fractions = app.add_subcommand("fractions", "sample strong/weak label modes");
  fractions->fallthrough();
  std::string fr_dataset, fr_split, fr_out = "label_modes.csv";
  double fraction = 0.1;
  fractions->add_option("--dataset", fr_dataset, "dataset file")->required();
  fractions->add_option("--split", fr_split, "split manifest")->required();
  fractions->add_option("--fraction", fraction, "strong fraction in (0,1]")->capture_default_str();
  fractions->add_option("--out", fr_out, "label-mode manifest output")->capture_default_str();

  // pseudolabel
  auto* pseudolabel = app.add_subcommand("pseudolabel", "simulate teacher pseudo-boxes");
  pseudolabel->fallthrough();
  std::string pl_dataset, pl_modes, pl_out = "pseudo.json";
  NoiseModel noise;
  pseudolabel->add_option("--dataset", pl_dataset, "dataset with ground-truth boxes")->required();
  pseudolabel->add_option("--modes", pl_modes, "restrict to weak images from a label-mode manifest");
  pseudolabel->add_option("--center-sigma", noise.center_jitter_sigma, "center jitter as fraction of box diagonal")->capture_default_str();
  pseudolabel->add_option("--scale-sigma", noise.scale_jitter_sigma, "log-scale width/height jitter")->capture_default_str();
  pseudolabel->add_option("--drop-rate", noise.drop_rate, "probability a point yields no box")->capture_default_str();
  pseudolabel->add_option("--score-alpha", noise.score_alpha, "Beta alpha for scores")->capture_default_str();
  pseudolabel->add_option("--score-beta", noise.score_beta, "Beta beta for scores")->capture_default_str();
  pseudolabel->add_option("--out", pl_out, "pseudo-label dataset output")->capture_default_str();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "AP / mAP at IoU thresholds");
  eval_cmd->fallthrough();
  std::string gt_path, preds_path, thresholds_text, eval_out, eval_csv;
  eval_cmd->add_option("--gt", gt_path, "ground-truth dataset")->required();
  eval_cmd->add_option("--preds", preds_path, "predictions file")->required();
  eval_cmd->add_option("--thresholds", thresholds_text, "comma-separated IoU thresholds");
  eval_cmd->add_option("--out", eval_out, "structured result output");
  eval_cmd->add_option("--csv", eval_csv, "summary csv output");

  // report
  auto* report = app.add_subcommand("report", "render AP tables and deltas");
  report->fallthrough();
  std::string report_input;
  report->add_option("--input", report_input, "report tables json")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->fallthrough();
  SynthParams sp;
  std::string objects_range = "1:4";
  synth->add_option("--n-images", sp.n_images, "image count")->capture_default_str();
  synth->add_option("--objects", objects_range, "objects per image, min:max")->capture_default_str();
  synth->add_option("--classes", sp.n_classes, "class count")->capture_default_str();
  synth->add_option("--countries", sp.n_countries, "country count")->capture_default_str();
  synth->add_option("--farms", sp.n_farms, "planted farm count")->capture_default_str();
  synth->add_option("--farm-spread-m", sp.farm_spread_m, "intra-farm point spread")->capture_default_str();
  synth->add_option("--width", sp.image_width, "image width")->capture_default_str();
  synth->add_option("--height", sp.image_height, "image height")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "full experiment pipeline from a config");
  run->fallthrough();
  std::string run_predictions;
  run->add_option("--predictions", run_predictions,
                  "use a real detector's predictions instead of the simulator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) {
      cmd_ingest(g, in_path, out_path, fair1m, max_dim, max_annotations,
                 retention, emit_points);
    } else if (*cluster) {
      cmd_cluster(points_path, cluster_dataset, eps_m, min_pts, cluster_manifest,
                  cluster_dataset_out);
    } else if (*split) {
      cmd_split(g, split_dataset, split_clusters, strategy, ratios_text,
                rules_path, split_out, split_dataset_out);
    } else if (*fractions) {
      cmd_fractions(g, fr_dataset, fr_split, fraction, fr_out);
    } else if (*pseudolabel) {
      cmd_pseudolabel(g, pl_dataset, pl_modes, noise, pl_out);
    } else if (*eval_cmd) {
      cmd_evaluate(gt_path, preds_path, thresholds_text, eval_out, eval_csv);
    } else if (*report) {
      cmd_report(g, report_input);
    } else if (*synth) {
      int omin = 0, omax = 0;
      if (std::sscanf(objects_range.c_str(), "%d:%d", &omin, &omax) != 2) {
        throw validation_error("--objects must be 'min:max'");
      }
      sp.objects_min = omin;
      sp.objects_max = omax;
      sp.seed = g.seed;
      cmd_synth(g, sp);
    } else if (*run) {
      if (config_path.empty()) {
        throw validation_error("run requires --config");
      }
      cmd_run(g, seed_opt->count() > 0, out_dir_opt->count() > 0, config_path,
              run_predictions);
    }
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
