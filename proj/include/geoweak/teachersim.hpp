#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/geometry.hpp"
#include "geoweak/rng.hpp"

namespace geoweak {

// Teacher-quality knobs. center_jitter_sigma is a fraction of the true box
// diagonal, scale_jitter_sigma a log-scale std; drop_rate is the chance a
// point yields no pseudo-box; scores come from Beta(score_alpha, score_beta).
struct NoiseModel {
  double center_jitter_sigma = 0.0;
  double scale_jitter_sigma = 0.0;
  double drop_rate = 0.0;
  double score_alpha = 2.0;
  double score_beta = 2.0;
};

inline void validate(const NoiseModel& m) {
  if (!(m.center_jitter_sigma >= 0.0) || !(m.scale_jitter_sigma >= 0.0)) {
    throw validation_error("noise sigmas must be >= 0");
  }
  if (!(m.drop_rate >= 0.0 && m.drop_rate <= 1.0)) {
    throw validation_error("drop_rate must be in [0,1]");
  }
  if (!(m.score_alpha > 0.0 && m.score_beta > 0.0)) {
    throw validation_error("score Beta parameters must be > 0");
  }
}

namespace detail {

// Smallest translation that brings p inside b (boundary inclusive).
inline BBox translate_to_contain(BBox b, const PixelPoint& p) {
  double dx = 0.0, dy = 0.0;
  if (p.x < b.xmin) dx = p.x - b.xmin;
  else if (p.x > b.xmax) dx = p.x - b.xmax;
  if (p.y < b.ymin) dy = p.y - b.ymin;
  else if (p.y > b.ymax) dy = p.y - b.ymax;
  return {b.xmin + dx, b.ymin + dy, b.xmax + dx, b.ymax + dy};
}

// Generated coordinates land on a 2^-20 px grid, mins floored and maxes
// ceiled. On-grid corners make the corner<->x/y/w/h conversion in the file
// format exact, so emitted boxes survive reparsing bit-for-bit; the outward
// direction keeps containment intact.
inline constexpr double kBoxGrid = 1048576.0;

inline BBox snap_outward(const BBox& b) {
  return {std::floor(b.xmin * kBoxGrid) / kBoxGrid,
          std::floor(b.ymin * kBoxGrid) / kBoxGrid,
          std::ceil(b.xmax * kBoxGrid) / kBoxGrid,
          std::ceil(b.ymax * kBoxGrid) / kBoxGrid};
}

// Clip to the image, keeping positive area. The source point is inside the
// image, so a surviving sliver always exists; degenerate sides are pushed
// back inward by up to one pixel.
inline BBox clamp_to_image(BBox b, int width, int height) {
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  BBox c{std::clamp(b.xmin, 0.0, w), std::clamp(b.ymin, 0.0, h),
         std::clamp(b.xmax, 0.0, w), std::clamp(b.ymax, 0.0, h)};
  if (!(c.xmin < c.xmax)) {
    c.xmin = std::max(0.0, c.xmax - 1.0);
    if (!(c.xmin < c.xmax)) c.xmax = std::min(w, c.xmin + 1.0);
  }
  if (!(c.ymin < c.ymax)) {
    c.ymin = std::max(0.0, c.ymax - 1.0);
    if (!(c.ymin < c.ymax)) c.ymax = std::min(h, c.ymin + 1.0);
  }
  return snap_outward(c);
}

}  // namespace detail

// Simulates the teacher: each box annotation stands for one weak point (its
// pixel-projected source point, or the box center when none is attached) and
// yields at most one pseudo-box. The true boxes exist only in this simulation
// context; a real teacher sees points alone. Per-image seeds make generation
// order-independent across images.
inline Dataset simulate_pseudo_labels(const Dataset& weak_with_truth,
                                      const NoiseModel& noise,
                                      std::uint64_t seed) {
  validate(noise);

  Dataset out;
  out.class_table = weak_with_truth.class_table;
  std::int64_t next_id = 0;
  for (const auto& img : weak_with_truth.images) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(img.image_id)));
    ImageRecord rec = img;
    rec.annotations.clear();
    for (const auto& ann : img.annotations) {
      if (!ann.has_box()) continue;
      if (noise.drop_rate > 0.0 && rng.uniform() < noise.drop_rate) continue;

      const BBox& truth = ann.box();
      const PixelPoint point = ann.source_point.value_or(box_center(truth));
      const double diagonal = std::hypot(truth.width(), truth.height());

      const double cx = (truth.xmin + truth.xmax) / 2.0 +
                        rng.normal(0.0, noise.center_jitter_sigma * diagonal);
      const double cy = (truth.ymin + truth.ymax) / 2.0 +
                        rng.normal(0.0, noise.center_jitter_sigma * diagonal);
      const double w = truth.width() * std::exp(rng.normal(0.0, noise.scale_jitter_sigma));
      const double h = truth.height() * std::exp(rng.normal(0.0, noise.scale_jitter_sigma));

      BBox b{cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
      b = detail::translate_to_contain(b, point);
      b = detail::clamp_to_image(b, rec.width, rec.height);

      Annotation pseudo;
      pseudo.id = next_id++;
      pseudo.class_id = ann.class_id;
      pseudo.geometry = b;
      pseudo.source_geo = ann.source_geo;
      pseudo.source_point = point;
      pseudo.score = rng.beta(noise.score_alpha, noise.score_beta);
      pseudo.provenance = Provenance::pseudo;
      rec.annotations.push_back(std::move(pseudo));
    }
    out.images.push_back(std::move(rec));
  }
  return out;
}

// Union of a strongly labeled corpus and a pseudo-labeled corpus; image id
// sets must be disjoint. Annotation ids are re-issued sequentially so the
// merged dataset validates.
inline Dataset merge_strong_and_pseudo(const Dataset& strong,
                                       const Dataset& pseudo) {
  if (strong.class_table != pseudo.class_table) {
    throw validation_error("merge: class tables differ");
  }
  std::set<std::int64_t> ids;
  for (const auto& img : strong.images) ids.insert(img.image_id);
  for (const auto& img : pseudo.images) {
    if (ids.count(img.image_id)) {
      throw validation_error("merge: image_id " + std::to_string(img.image_id) +
                             " present in both datasets");
    }
  }

  Dataset out;
  out.class_table = strong.class_table;
  out.images = strong.images;
  out.images.insert(out.images.end(), pseudo.images.begin(), pseudo.images.end());
  std::int64_t next_id = 0;
  for (auto& img : out.images) {
    for (auto& ann : img.annotations) ann.id = next_id++;
  }
  return out;
}

}  // namespace geoweak
