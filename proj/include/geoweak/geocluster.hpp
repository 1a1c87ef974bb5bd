#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"

namespace geoweak {

inline constexpr double kEarthRadiusM = 6371000.0;

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine(const GeoPoint& a, const GeoPoint& b) {
  constexpr double deg = M_PI / 180.0;
  const double lat1 = a.lat * deg;
  const double lat2 = b.lat * deg;
  const double sdlat = std::sin((lat2 - lat1) / 2.0);
  const double sdlon = std::sin((b.lon - a.lon) * deg / 2.0);
  const double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

struct DbscanParams {
  double eps_m = 2000.0;  // neighborhood radius in meters
  int min_pts = 3;        // minimum cluster size, self included
};

// Per-point labels; nullopt marks noise. Cluster ids are contiguous from 0,
// ordered by the input index of each cluster's first core point.
struct ClusterAssignment {
  std::vector<std::optional<std::int32_t>> labels;
  std::int32_t cluster_count = 0;

  static constexpr std::int32_t kNoise = -1;

  std::int32_t label_or_noise(std::size_t i) const {
    return labels[i] ? *labels[i] : kNoise;
  }
};

// Standard DBSCAN over haversine distance. Core point: >= min_pts neighbors
// within eps, self included. Border points join the earliest-created cluster
// that reaches them, which makes the output deterministic in input order.
inline ClusterAssignment dbscan(const std::vector<GeoPoint>& points,
                                const DbscanParams& params) {
  if (!(params.eps_m > 0.0)) {
    throw validation_error("dbscan: eps must be > 0");
  }
  if (params.min_pts < 1) {
    throw validation_error("dbscan: min_pts must be >= 1");
  }

  const std::size_t n = points.size();
  ClusterAssignment out;
  out.labels.assign(n, std::nullopt);
  if (n == 0) return out;

  std::vector<std::vector<std::uint32_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (haversine(points[i], points[j]) <= params.eps_m) {
        neighbors[i].push_back(static_cast<std::uint32_t>(j));
        neighbors[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  // Neighbor lists must be in ascending index order for deterministic
  // expansion; the fill above inserts self out of order.
  for (auto& list : neighbors) std::sort(list.begin(), list.end());

  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = neighbors[i].size() >= static_cast<std::size_t>(params.min_pts);
  }

  std::int32_t next_cluster = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (out.labels[seed] || !core[seed]) continue;
    const std::int32_t cid = next_cluster++;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(seed)};
    out.labels[seed] = cid;
    while (!queue.empty()) {
      const std::uint32_t p = queue.front();
      queue.pop_front();
      if (!core[p]) continue;  // border points do not expand
      for (std::uint32_t q : neighbors[p]) {
        if (!out.labels[q]) {
          out.labels[q] = cid;
          queue.push_back(q);
        }
      }
    }
  }
  out.cluster_count = next_cluster;
  return out;
}

// Reference to an annotation that carries a geographic source point, in
// dataset iteration order. This order defines the point indices used by
// cluster manifests.
struct GeoAnnotationRef {
  std::size_t image_index = 0;
  std::size_t annotation_index = 0;
  GeoPoint geo;
};

inline std::vector<GeoAnnotationRef> extract_geo_points(const Dataset& d) {
  std::vector<GeoAnnotationRef> refs;
  for (std::size_t i = 0; i < d.images.size(); ++i) {
    const auto& anns = d.images[i].annotations;
    for (std::size_t j = 0; j < anns.size(); ++j) {
      if (anns[j].source_geo) {
        refs.push_back({i, j, *anns[j].source_geo});
      }
    }
  }
  return refs;
}

struct ClusterConflict {
  std::int64_t image_id = 0;
  std::int32_t chosen = 0;
  // (cluster id, member count) per cluster seen in the image, ascending id.
  std::vector<std::pair<std::int32_t, std::size_t>> counts;
};

struct AssignReport {
  std::vector<ClusterConflict> conflicts;
  std::int32_t total_clusters = 0;  // real clusters plus appended singletons
};

// Fills image.cluster_id from a per-point assignment aligned with
// extract_geo_points order. Images whose annotations disagree keep the
// majority cluster (ties to the lower id) and are flagged. Images with no
// clustered annotation, including annotation-free negatives, get fresh
// singleton ids appended after the real clusters.
inline std::pair<Dataset, AssignReport> assign_clusters_to_images(
    const Dataset& d, const ClusterAssignment& assignment) {
  const auto refs = extract_geo_points(d);
  if (assignment.labels.size() != refs.size()) {
    throw validation_error(
        "assign_clusters_to_images: assignment covers " +
        std::to_string(assignment.labels.size()) + " points but dataset has " +
        std::to_string(refs.size()) + " geo-tagged annotations");
  }

  // Per image: member count per cluster, in annotation order.
  std::vector<std::map<std::int32_t, std::size_t>> votes(d.images.size());
  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (assignment.labels[k]) {
      votes[refs[k].image_index][*assignment.labels[k]] += 1;
    }
  }

  Dataset out = d;
  AssignReport report;
  std::int32_t next_singleton = assignment.cluster_count;
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    auto& img = out.images[i];
    const auto& v = votes[i];
    if (v.empty()) {
      img.cluster_id = next_singleton++;
      continue;
    }
    std::int32_t best = v.begin()->first;
    std::size_t best_count = v.begin()->second;
    for (const auto& [cid, count] : v) {
      if (count > best_count) {
        best = cid;
        best_count = count;
      }
    }
    img.cluster_id = best;
    if (v.size() > 1) {
      ClusterConflict conflict;
      conflict.image_id = img.image_id;
      conflict.chosen = best;
      conflict.counts.assign(v.begin(), v.end());
      report.conflicts.push_back(std::move(conflict));
    }
  }
  report.total_clusters = next_singleton;
  return {std::move(out), std::move(report)};
}

}  // namespace geoweak
