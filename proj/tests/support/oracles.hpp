#pragma once

// Independent reference implementations used only by tests. These deliberately
// avoid the library's code paths: IoU by counting raster cells, DBSCAN by
// explicit transitive closure, AP by enumerating every score cutoff.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "geoweak/datamodel.hpp"
#include "geoweak/evaluator.hpp"
#include "geoweak/geocluster.hpp"

namespace oracles {

// Counts unit grid cells; exact for integer-coordinate boxes.
inline double raster_iou(const geoweak::BBox& a, const geoweak::BBox& b,
                         int grid = 128) {
  long inter = 0, uni = 0;
  for (int i = -grid; i < grid; ++i) {
    for (int j = -grid; j < grid; ++j) {
      const bool in_a = a.xmin <= i && i + 1 <= a.xmax && a.ymin <= j && j + 1 <= a.ymax;
      const bool in_b = b.xmin <= i && i + 1 <= b.xmax && b.ymin <= j && j + 1 <= b.ymax;
      inter += (in_a && in_b);
      uni += (in_a || in_b);
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Transitive closure over core points, then border attachment to the
// lowest-numbered component with a core neighbor in range. Component numbers
// follow the input index of each component's first core point, matching the
// deterministic order the library promises.
inline std::vector<int> closure_dbscan(const std::vector<geoweak::GeoPoint>& pts,
                                       double eps_m, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[i][j] = geoweak::haversine(pts[i], pts[j]);
    }
  }

  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += (dist[i][j] <= eps_m);
    core[i] = count >= min_pts;
  }

  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] != -1) continue;
    // flood the core-to-core closure from i
    std::vector<std::size_t> frontier{i};
    comp[i] = next;
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (core[q] && comp[q] == -1 && dist[p][q] <= eps_m) {
          comp[q] = next;
          frontier.push_back(q);
        }
      }
    }
    ++next;
  }

  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      labels[i] = comp[i];
      continue;
    }
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && dist[i][j] <= eps_m) {
        if (best == -1 || comp[j] < best) best = comp[j];
      }
    }
    labels[i] = best;  // -1 stays noise
  }
  return labels;
}

// AP from a flag sequence by enumerating every cutoff and max-scanning the
// envelope at each recall step.
inline std::optional<double> enumerated_ap(const std::vector<bool>& flags,
                                           std::size_t gt_count) {
  if (gt_count == 0) return std::nullopt;
  const std::size_t n = flags.size();
  if (n == 0) return 0.0;

  std::vector<double> prec(n), rec(n);
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t tp = 0;
    for (std::size_t i = 0; i < k; ++i) tp += flags[i] ? 1 : 0;
    prec[k - 1] = static_cast<double>(tp) / static_cast<double>(k);
    rec[k - 1] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }

  double ap = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!flags[i]) continue;
    double env = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rec[j] >= rec[i]) env = std::max(env, prec[j]);
    }
    ap += (rec[i] - prev) * env;
    prev = rec[i];
  }
  return ap;
}

// Naive re-implementation of the full evaluation protocol: same tie rules,
// every step done the slow way (fresh IoU scans, no precomputed sort keys).
struct NaiveEval {
  std::vector<std::vector<std::optional<double>>> ap;  // [class][threshold]
  std::vector<std::optional<double>> map;              // [threshold]
};

inline NaiveEval naive_evaluate(const std::vector<geoweak::Detection>& preds,
                                const geoweak::Dataset& gt,
                                const std::vector<double>& thresholds) {
  const std::size_t n_classes = gt.class_table.size();
  NaiveEval out;
  out.ap.assign(n_classes, {});
  out.map.assign(thresholds.size(), std::nullopt);

  for (std::size_t c = 0; c < n_classes; ++c) {
    // Global rank order for this class: score desc, input index asc.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].class_id == static_cast<int>(c)) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].score > preds[b].score;
    });

    std::size_t gt_count = 0;
    for (const auto& img : gt.images) {
      for (const auto& ann : img.annotations) {
        gt_count += (ann.has_box() && ann.class_id == static_cast<int>(c));
      }
    }

    for (double tau : thresholds) {
      // Greedy matching, repeated per image with fresh scans.
      std::map<std::int64_t, std::set<std::size_t>> used;  // image -> taken gts
      std::vector<bool> flags;
      for (std::size_t idx : order) {
        const auto& det = preds[idx];
        std::vector<geoweak::BBox> boxes;
        const auto* img = gt.find_image(det.image_id);
        for (const auto& ann : img->annotations) {
          if (ann.has_box() && ann.class_id == det.class_id) {
            boxes.push_back(ann.box());
          }
        }
        double best = -1.0;
        std::size_t best_g = 0;
        for (std::size_t g = 0; g < boxes.size(); ++g) {
          if (used[det.image_id].count(g)) continue;
          const double v = geoweak::iou(det.box, boxes[g]);
          if (v > best) {
            best = v;
            best_g = g;
          }
        }
        if (best >= tau) {
          flags.push_back(true);
          used[det.image_id].insert(best_g);
        } else {
          flags.push_back(false);
        }
      }
      out.ap[c].push_back(enumerated_ap(flags, gt_count));
    }
  }

  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (out.ap[c][t]) {
        sum += *out.ap[c][t];
        ++counted;
      }
    }
    if (counted) out.map[t] = sum / static_cast<double>(counted);
  }
  return out;
}

}  // namespace oracles
