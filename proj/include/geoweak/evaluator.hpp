#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/geometry.hpp"

namespace geoweak {

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.25, 0.5, 0.75};
};

inline void validate(const EvalConfig& cfg) {
  if (cfg.iou_thresholds.empty()) {
    throw validation_error("eval config: at least one IoU threshold required");
  }
  double prev = 0.0;
  for (double t : cfg.iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw validation_error("eval config: thresholds must lie in (0,1]");
    }
    if (!(t > prev)) {
      throw validation_error("eval config: thresholds must be strictly increasing");
    }
    prev = t;
  }
}

// Greedy matching for detections of one image and one class, already sorted
// by descending score (ties by ascending detection index). Each detection
// takes the unmatched ground truth with the highest IoU when that IoU >= the
// threshold (inclusive); each ground truth matches at most once.
inline std::vector<bool> match_detections(const std::vector<Detection>& dets,
                                          const std::vector<BBox>& gts,
                                          double iou_threshold) {
  std::vector<bool> flags(dets.size(), false);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    double best_iou = -1.0;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v > best_iou) {
        best_iou = v;
        best_g = g;
      }
    }
    if (best_iou >= iou_threshold) {
      flags[d] = true;
      taken[best_g] = true;
    }
  }
  return flags;
}

// Exact area under the monotone precision envelope over recall in [0,1].
// Flags must be in global score order. Returns nullopt when there is no
// ground truth (the class is then excluded from mAP); zero detections with
// ground truth present score 0.
inline std::optional<double> average_precision(const std::vector<bool>& flags,
                                               std::size_t gt_count) {
  if (gt_count == 0) return std::nullopt;
  if (flags.empty()) return 0.0;

  const std::size_t n = flags.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += flags[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }
  // Envelope: non-increasing from the right.
  for (std::size_t i = n - 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalCell {
  std::optional<double> ap;  // nullopt when the class has no ground truth
  MatchCounts counts;
};

struct EvalResult {
  std::vector<double> thresholds;
  std::vector<int> class_ids;
  // cells[class_index][threshold_index]
  std::vector<std::vector<EvalCell>> cells;
  // Unweighted mean over classes with >= 1 ground-truth instance; nullopt
  // when no class has ground truth.
  std::vector<std::optional<double>> map_per_threshold;
  bool single_class = false;

  std::optional<double> map_at(std::size_t threshold_index) const {
    return map_per_threshold.at(threshold_index);
  }
};

// Pools detections per class across all images: per-image greedy matching,
// then one global PR accumulation in (score desc, detection index asc) order.
// For single-class datasets the mAP column is simply that class's AP.
inline EvalResult evaluate(const std::vector<Detection>& preds,
                           const Dataset& gt, const EvalConfig& cfg) {
  validate(cfg);

  std::map<std::int64_t, const ImageRecord*> images;
  for (const auto& img : gt.images) images[img.image_id] = &img;
  for (const auto& det : preds) {
    if (!images.count(det.image_id)) {
      throw validation_error("prediction references unknown image_id " +
                             std::to_string(det.image_id));
    }
    if (!gt.class_table.contains(det.class_id)) {
      throw validation_error("prediction references unknown class_id " +
                             std::to_string(det.class_id));
    }
  }

  const std::size_t n_classes = gt.class_table.size();
  const std::size_t n_thresholds = cfg.iou_thresholds.size();

  // Ground-truth boxes per (image, class). Point annotations carry no extent
  // and are not evaluation targets.
  std::map<std::pair<std::int64_t, int>, std::vector<BBox>> gt_boxes;
  std::vector<std::size_t> gt_count(n_classes, 0);
  for (const auto& img : gt.images) {
    for (const auto& ann : img.annotations) {
      if (!ann.has_box()) continue;
      gt_boxes[{img.image_id, ann.class_id}].push_back(ann.box());
      gt_count[static_cast<std::size_t>(ann.class_id)] += 1;
    }
  }

  struct Ranked {
    double score;
    std::size_t index;  // global input index: the stable tie-break
    std::int64_t image_id;
  };
  std::vector<std::vector<Ranked>> per_class(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    per_class[static_cast<std::size_t>(preds[i].class_id)].push_back(
        {preds[i].score, i, preds[i].image_id});
  }

  EvalResult result;
  result.thresholds = cfg.iou_thresholds;
  result.single_class = (n_classes == 1);
  result.cells.assign(n_classes, std::vector<EvalCell>(n_thresholds));
  for (std::size_t c = 0; c < n_classes; ++c) {
    result.class_ids.push_back(static_cast<int>(c));
  }

  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& ranked = per_class[c];
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.index < b.index;
    });

    // Per-image detection lists in the same global order.
    std::map<std::int64_t, std::vector<std::size_t>> by_image;
    for (const auto& r : ranked) by_image[r.image_id].push_back(r.index);

    for (std::size_t t = 0; t < n_thresholds; ++t) {
      const double tau = cfg.iou_thresholds[t];
      std::map<std::size_t, bool> flag_by_index;
      for (const auto& [image_id, indices] : by_image) {
        std::vector<Detection> dets;
        dets.reserve(indices.size());
        for (std::size_t idx : indices) dets.push_back(preds[idx]);
        static const std::vector<BBox> kNone;
        auto it = gt_boxes.find({image_id, static_cast<int>(c)});
        const auto& boxes = (it == gt_boxes.end()) ? kNone : it->second;
        const auto flags = match_detections(dets, boxes, tau);
        for (std::size_t k = 0; k < indices.size(); ++k) {
          flag_by_index[indices[k]] = flags[k];
        }
      }
      std::vector<bool> pooled;
      pooled.reserve(ranked.size());
      for (const auto& r : ranked) pooled.push_back(flag_by_index[r.index]);

      EvalCell& cell = result.cells[c][t];
      cell.ap = average_precision(pooled, gt_count[c]);
      for (bool f : pooled) (f ? cell.counts.tp : cell.counts.fp) += 1;
      cell.counts.fn = gt_count[c] - cell.counts.tp;
    }
  }

  for (std::size_t t = 0; t < n_thresholds; ++t) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (result.cells[c][t].ap) {
        sum += *result.cells[c][t].ap;
        ++counted;
      }
    }
    result.map_per_threshold.push_back(
        counted ? std::optional<double>(sum / static_cast<double>(counted))
                : std::nullopt);
  }
  return result;
}

}  // namespace geoweak
