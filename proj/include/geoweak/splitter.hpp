#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/geometry.hpp"
#include "geoweak/rng.hpp"

namespace geoweak {

enum class Split { train, val, test, teacher_eval };

inline constexpr std::array<Split, 4> kAllSplits = {
    Split::train, Split::val, Split::test, Split::teacher_eval};

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::teacher_eval: return "teacher_eval";
  }
  return "?";
}

inline std::optional<Split> split_from_string(std::string_view s) {
  for (Split v : kAllSplits) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

enum class LabelMode { strong, weak };

inline const char* to_string(LabelMode m) {
  return m == LabelMode::strong ? "strong" : "weak";
}

inline std::optional<LabelMode> label_mode_from_string(std::string_view s) {
  if (s == "strong") return LabelMode::strong;
  if (s == "weak") return LabelMode::weak;
  return std::nullopt;
}

// Which split each image lives in. Total over the dataset it was built from.
struct SplitAssignment {
  std::map<std::int64_t, Split> by_image;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& [id, split] : by_image) n += (split == s);
    return n;
  }
};

// strong/weak flag per train-split image.
struct LabelModeAssignment {
  std::map<std::int64_t, LabelMode> by_image;
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

namespace detail {

inline std::map<std::int32_t, std::vector<std::int64_t>> images_by_cluster(
    const Dataset& d, const char* op) {
  std::map<std::int32_t, std::vector<std::int64_t>> clusters;
  for (const auto& img : d.images) {
    if (!img.cluster_id) {
      throw validation_error(std::string(op) + ": image " +
                             std::to_string(img.image_id) +
                             " has no cluster_id; run clustering first");
    }
    clusters[*img.cluster_id].push_back(img.image_id);
  }
  return clusters;
}

}  // namespace detail

// Shuffles clusters with the seeded generator and greedily assigns each to
// the split currently furthest below its target image count. All images of a
// cluster share a split.
inline SplitAssignment split_random_by_cluster(const Dataset& d,
                                               const SplitRatios& ratios,
                                               std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0)) {
    throw validation_error("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw validation_error("split ratios must sum to 1");
  }

  auto clusters = detail::images_by_cluster(d, "split_random_by_cluster");
  if (clusters.size() < 3) {
    throw validation_error("fewer clusters than splits");
  }

  std::vector<std::int32_t> order;
  order.reserve(clusters.size());
  for (const auto& [cid, ids] : clusters) order.push_back(cid);
  Rng rng(seed);
  rng.shuffle(order);

  const double total = static_cast<double>(d.images.size());
  const std::array<Split, 3> splits = {Split::train, Split::val, Split::test};
  const std::array<double, 3> targets = {ratios.train * total,
                                         ratios.val * total,
                                         ratios.test * total};
  std::array<double, 3> assigned = {0.0, 0.0, 0.0};

  SplitAssignment out;
  for (std::int32_t cid : order) {
    std::size_t pick = 0;
    double best_deficit = targets[0] - assigned[0];
    for (std::size_t s = 1; s < splits.size(); ++s) {
      const double deficit = targets[s] - assigned[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        pick = s;
      }
    }
    const auto& ids = clusters[cid];
    assigned[pick] += static_cast<double>(ids.size());
    for (std::int64_t id : ids) out.by_image[id] = splits[pick];
  }
  return out;
}

// One region predicate. Empty country lists impose no country constraint;
// lon_max tests lon < threshold, lon_min tests lon >= threshold, so a shared
// meridian yields disjoint west/east rules. rest matches everything.
struct RegionRule {
  Split split = Split::train;
  std::vector<std::string> countries;
  std::vector<std::string> exclude_countries;
  std::optional<double> lon_min;
  std::optional<double> lon_max;
  bool rest = false;
};

struct LeakageFix {
  std::int32_t cluster_id = 0;
  Split moved_to = Split::train;
};

struct RegionSplitResult {
  SplitAssignment assignment;
  std::vector<LeakageFix> fixes;
};

// Assigns each image by the first matching rule, then repairs leakage: any
// cluster straddling splits is moved whole to its majority split (ties to
// the earlier split in declaration order train/val/test/teacher_eval).
inline RegionSplitResult split_by_region(const Dataset& d,
                                         const std::vector<RegionRule>& rules) {
  if (rules.empty()) {
    throw validation_error("split_by_region: no rules given");
  }

  auto matches = [](const RegionRule& rule, const ImageRecord& img) {
    if (rule.rest) return true;
    if (!rule.countries.empty()) {
      if (!img.country) {
        throw validation_error("image " + std::to_string(img.image_id) +
                               " has no country but a rule requires one");
      }
      if (std::find(rule.countries.begin(), rule.countries.end(),
                    *img.country) == rule.countries.end()) {
        return false;
      }
    }
    if (!rule.exclude_countries.empty()) {
      if (!img.country) {
        throw validation_error("image " + std::to_string(img.image_id) +
                               " has no country but a rule requires one");
      }
      if (std::find(rule.exclude_countries.begin(),
                    rule.exclude_countries.end(),
                    *img.country) != rule.exclude_countries.end()) {
        return false;
      }
    }
    if (rule.lon_min || rule.lon_max) {
      if (!img.centroid_geo) {
        throw validation_error("image " + std::to_string(img.image_id) +
                               " has no longitude but a rule requires one");
      }
      const double lon = img.centroid_geo->lon;
      if (rule.lon_min && !(lon >= *rule.lon_min)) return false;
      if (rule.lon_max && !(lon < *rule.lon_max)) return false;
    }
    return true;
  };

  RegionSplitResult result;
  for (const auto& img : d.images) {
    bool placed = false;
    for (const auto& rule : rules) {
      if (matches(rule, img)) {
        result.assignment.by_image[img.image_id] = rule.split;
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw validation_error("image " + std::to_string(img.image_id) +
                             " matches no region rule and no rest rule exists");
    }
  }

  // Leakage repair pass over clusters.
  auto clusters = detail::images_by_cluster(d, "split_by_region");
  for (const auto& [cid, ids] : clusters) {
    std::map<Split, std::size_t> counts;
    for (std::int64_t id : ids) counts[result.assignment.by_image.at(id)] += 1;
    if (counts.size() <= 1) continue;
    Split majority = Split::train;
    std::size_t best = 0;
    for (Split s : kAllSplits) {
      auto it = counts.find(s);
      if (it != counts.end() && it->second > best) {
        best = it->second;
        majority = s;
      }
    }
    for (std::int64_t id : ids) result.assignment.by_image[id] = majority;
    result.fixes.push_back({cid, majority});
  }
  return result;
}

// Marks round(f * |train|) images strong (half-away-from-zero) and the rest
// weak. Multi-class datasets are sampled stratified: classes are covered in
// ascending id order before the remaining budget is drawn uniformly.
inline LabelModeAssignment sample_label_fractions(const Dataset& d,
                                                  const SplitAssignment& split,
                                                  double fraction,
                                                  std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw validation_error("fraction must be in (0,1]");
  }

  std::vector<const ImageRecord*> train;  // dataset order
  for (const auto& img : d.images) {
    auto it = split.by_image.find(img.image_id);
    if (it != split.by_image.end() && it->second == Split::train) {
      train.push_back(&img);
    }
  }
  if (train.empty()) {
    throw validation_error("train split is empty");
  }

  const auto n_strong = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(train.size())));
  if (n_strong == 0) {
    throw validation_error("fraction yields zero strong images");
  }

  Rng rng(seed);
  std::vector<bool> chosen(train.size(), false);
  std::size_t budget = n_strong;

  if (d.class_table.size() > 1) {
    std::set<int> covered;
    for (int c = 0; c < static_cast<int>(d.class_table.size()); ++c) {
      if (budget == 0) break;
      if (covered.count(c)) continue;
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (chosen[i]) continue;
        for (const auto& ann : train[i]->annotations) {
          if (ann.class_id == c) {
            candidates.push_back(i);
            break;
          }
        }
      }
      if (candidates.empty()) continue;
      const std::size_t pick =
          candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
      chosen[pick] = true;
      --budget;
      for (const auto& ann : train[pick]->annotations) {
        covered.insert(ann.class_id);
      }
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!chosen[i]) pool.push_back(i);
  }
  while (budget > 0) {
    const std::size_t k = static_cast<std::size_t>(rng.below(pool.size()));
    chosen[pool[k]] = true;
    pool[k] = pool.back();
    pool.pop_back();
    --budget;
  }

  LabelModeAssignment out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    out.by_image[train[i]->image_id] =
        chosen[i] ? LabelMode::strong : LabelMode::weak;
  }
  return out;
}

enum class WeakSource { box_center, source_point };

// Replaces each box on a weak image with a single point annotation; class,
// ids and source fields are preserved. Strong images pass through untouched.
// Standalone point annotations on weak images are dropped: they duplicate
// the source information already attached to the boxes.
inline Dataset derive_weak_labels(const Dataset& d,
                                  const LabelModeAssignment& modes,
                                  WeakSource source) {
  Dataset out = d;
  for (auto& img : out.images) {
    auto it = modes.by_image.find(img.image_id);
    if (it == modes.by_image.end() || it->second != LabelMode::weak) continue;
    std::vector<Annotation> points;
    points.reserve(img.annotations.size());
    for (const auto& ann : img.annotations) {
      if (!ann.has_box()) continue;
      Annotation p = ann;
      if (source == WeakSource::box_center) {
        p.geometry = box_center(ann.box());
      } else {
        if (!ann.source_point) {
          throw validation_error("annotation " + std::to_string(ann.id) +
                                 " has no pixel-projected source point");
        }
        p.geometry = *ann.source_point;
      }
      points.push_back(std::move(p));
    }
    img.annotations = std::move(points);
  }
  return out;
}

struct RetentionReport {
  std::size_t dropped_images = 0;
  std::size_t dropped_points = 0;
};

// Keeps annotated images only when at least one box contains a candidate
// point: a standalone point annotation, or a source point already attached
// to the box (so the filter is idempotent). Within kept images each box
// lacking source fields absorbs the first unclaimed point it contains; the
// turbine is then one box annotation carrying its originating point, and the
// image never contributes the same turbine twice to geo extraction.
// Contained-but-unclaimed points stay standalone; points contained in no box
// are dropped and counted. Annotation-free images pass through: the filter
// applies to crowdsource-labeled positives.
inline std::pair<Dataset, RetentionReport> retention_filter(const Dataset& d) {
  Dataset out;
  out.class_table = d.class_table;
  RetentionReport report;

  for (const auto& img : d.images) {
    if (img.annotations.empty()) {
      out.images.push_back(img);
      continue;
    }

    std::vector<std::size_t> box_idx, point_idx;
    for (std::size_t i = 0; i < img.annotations.size(); ++i) {
      (img.annotations[i].has_box() ? box_idx : point_idx).push_back(i);
    }

    std::vector<bool> point_contained(point_idx.size(), false);
    bool any_pair = false;
    for (std::size_t p = 0; p < point_idx.size(); ++p) {
      const PixelPoint& pt = img.annotations[point_idx[p]].point();
      for (std::size_t b : box_idx) {
        if (contains(img.annotations[b].box(), pt)) {
          point_contained[p] = true;
          any_pair = true;
          break;
        }
      }
    }
    for (std::size_t b : box_idx) {
      const Annotation& box = img.annotations[b];
      if (box.source_point && contains(box.box(), *box.source_point)) {
        any_pair = true;
      }
    }

    if (!any_pair) {
      ++report.dropped_images;
      continue;
    }

    ImageRecord kept = img;
    kept.annotations.clear();
    std::vector<bool> point_claimed(point_idx.size(), false);
    for (std::size_t i = 0; i < img.annotations.size(); ++i) {
      const Annotation& ann = img.annotations[i];
      if (ann.has_box()) {
        Annotation b = ann;
        if (!b.source_point) {
          for (std::size_t p = 0; p < point_idx.size(); ++p) {
            if (point_claimed[p]) continue;
            const Annotation& pt = img.annotations[point_idx[p]];
            if (contains(b.box(), pt.point())) {
              b.source_point = pt.point();
              if (!b.source_geo) b.source_geo = pt.source_geo;
              point_claimed[p] = true;
              break;
            }
          }
        }
        kept.annotations.push_back(std::move(b));
      }
    }
    for (std::size_t p = 0; p < point_idx.size(); ++p) {
      if (point_claimed[p]) continue;
      if (point_contained[p]) {
        kept.annotations.push_back(img.annotations[point_idx[p]]);
      } else {
        ++report.dropped_points;
      }
    }
    out.images.push_back(std::move(kept));
  }
  return {std::move(out), report};
}

}  // namespace geoweak
