#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "geoweak/errors.hpp"

namespace geoweak {

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

// Axis-aligned box in pixel space, corner form. Valid boxes have strictly
// positive area.
struct BBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }

  bool finite() const {
    return std::isfinite(xmin) && std::isfinite(ymin) && std::isfinite(xmax) &&
           std::isfinite(ymax);
  }
  bool valid() const { return finite() && xmin < xmax && ymin < ymax; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Four corners in polygon order.
struct OrientedBox {
  std::array<PixelPoint, 4> corners;

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  bool valid() const {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 &&
           lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
  }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct ClassEntry {
  int id = 0;
  std::string name;

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

// Ordered class list; ids must be unique and contiguous from 0.
struct ClassTable {
  std::vector<ClassEntry> entries;

  std::size_t size() const { return entries.size(); }

  bool contiguous() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].id != static_cast<int>(i)) return false;
    }
    return true;
  }

  bool contains(int class_id) const {
    return class_id >= 0 && class_id < static_cast<int>(entries.size());
  }

  friend bool operator==(const ClassTable&, const ClassTable&) = default;
};

enum class Provenance { manual, pseudo };

// One labeled object. Geometry is exactly one of box or point; the weak vs
// strong distinction lives at image level. source_geo / source_point carry the
// originating geographic coordinate and its pixel projection when known.
struct Annotation {
  std::int64_t id = 0;
  int class_id = 0;
  std::variant<BBox, PixelPoint> geometry;
  std::optional<GeoPoint> source_geo;
  std::optional<PixelPoint> source_point;
  std::optional<double> score;  // pseudo-label confidence
  Provenance provenance = Provenance::manual;

  bool has_box() const { return std::holds_alternative<BBox>(geometry); }
  bool has_point() const { return std::holds_alternative<PixelPoint>(geometry); }
  const BBox& box() const { return std::get<BBox>(geometry); }
  const PixelPoint& point() const { return std::get<PixelPoint>(geometry); }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ImageRecord {
  std::int64_t image_id = 0;
  int width = 0;   // pixels
  int height = 0;  // pixels
  std::vector<Annotation> annotations;
  std::optional<std::string> country;  // ISO code
  std::optional<GeoPoint> centroid_geo;
  std::optional<std::int32_t> cluster_id;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Dataset {
  ClassTable class_table;
  std::vector<ImageRecord> images;

  const ImageRecord* find_image(std::int64_t image_id) const {
    for (const auto& img : images) {
      if (img.image_id == image_id) return &img;
    }
    return nullptr;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Detection {
  std::int64_t image_id = 0;
  int class_id = 0;
  BBox box;
  double score = 0.0;  // in [0,1]

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Violation {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::size_t image_count = 0;
  std::size_t box_count = 0;
  std::size_t point_count = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// Collects every invariant violation without mutating the input. An empty
// violation list means the dataset is well-formed.
inline ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  report.image_count = d.images.size();

  auto add = [&report](const char* kind, std::string message) {
    report.violations.push_back({kind, std::move(message)});
  };

  if (!d.class_table.contiguous()) {
    add("bad-class-table", "class ids must be unique and contiguous from 0");
  }

  std::set<std::int64_t> image_ids;
  std::set<std::int64_t> annotation_ids;
  for (const auto& img : d.images) {
    if (!image_ids.insert(img.image_id).second) {
      add("duplicate-image-id",
          "image_id " + std::to_string(img.image_id) + " appears more than once");
    }
    if (img.width <= 0 || img.height <= 0) {
      add("bad-dimensions", "image " + std::to_string(img.image_id) +
                                " has non-positive dimensions");
    }
    if (img.centroid_geo && !img.centroid_geo->valid()) {
      add("invalid-geo", "image " + std::to_string(img.image_id) +
                             " centroid lat/lon out of range");
    }
    for (const auto& ann : img.annotations) {
      const std::string ann_label = "annotation " + std::to_string(ann.id);
      if (!annotation_ids.insert(ann.id).second) {
        add("duplicate-annotation-id", ann_label + " id appears more than once");
      }
      if (!d.class_table.contains(ann.class_id)) {
        add("unknown-class", ann_label + " references class_id " +
                                 std::to_string(ann.class_id));
      }
      if (ann.has_box()) {
        ++report.box_count;
        const BBox& b = ann.box();
        if (!b.finite()) {
          add("nonfinite-coordinate", ann_label + " box has non-finite coordinates");
        } else if (!(b.xmin < b.xmax && b.ymin < b.ymax)) {
          add("degenerate-box", ann_label + " box has non-positive area");
        } else if (b.xmin < 0.0 || b.ymin < 0.0 ||
                   b.xmax > static_cast<double>(img.width) ||
                   b.ymax > static_cast<double>(img.height)) {
          add("box-out-of-bounds",
              ann_label + " box extends past image bounds");
        }
      } else {
        ++report.point_count;
        if (!ann.point().finite()) {
          add("nonfinite-coordinate", ann_label + " point has non-finite coordinates");
        }
      }
      if (ann.source_geo && !ann.source_geo->valid()) {
        add("invalid-geo", ann_label + " source lat/lon out of range");
      }
      if (ann.source_point && !ann.source_point->finite()) {
        add("nonfinite-coordinate", ann_label + " source point non-finite");
      }
      if (ann.score &&
          !(std::isfinite(*ann.score) && *ann.score >= 0.0 && *ann.score <= 1.0)) {
        add("invalid-score", ann_label + " score outside [0,1]");
      }
    }
  }
  return report;
}

}  // namespace geoweak
