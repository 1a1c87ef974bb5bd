#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"
#include "geoweak/geocluster.hpp"
#include "geoweak/geometry.hpp"
#include "geoweak/splitter.hpp"

namespace geoweak {

// Insertion-ordered json keeps emitted files byte-stable.
using json = nlohmann::ordered_json;

enum class ParseMode { strict, lenient };

struct ParseResult {
  Dataset dataset;
  std::size_t dropped_records = 0;  // lenient mode only
  std::size_t clamped_boxes = 0;    // boxes clipped to image bounds
};

namespace detail {

inline json parse_json_stream(std::istream& in, const char* what) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error(std::string(what) + ": " + e.what());
  }
  return doc;
}

inline double require_number(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw format_error(ctx + ": missing or non-numeric '" + key + "'");
  }
  return j[key].get<double>();
}

inline std::int64_t require_int(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw format_error(ctx + ": missing or non-integer '" + key + "'");
  }
  return j[key].get<std::int64_t>();
}

// Round-trips doubles through json exactly (shortest round-trip repr).
inline json coords(std::initializer_list<double> vals) {
  json arr = json::array();
  for (double v : vals) arr.push_back(v);
  return arr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Detection dataset files
//
// Shell: {"categories":[{id,name}], "images":[{id,width,height,country?,
// lat?,lon?,cluster_id?}], "annotations":[{id,image_id,category_id, exactly
// one of bbox:[x,y,w,h] | point:[x,y] | obb:[x1..y4], source_geo?,
// source_point?, score?, provenance?}]}. Oriented boxes are converted to
// their minimum bounding rectangle at parse time; all boxes are clamped to
// image bounds and counted when clipped.
// ---------------------------------------------------------------------------

inline ParseResult parse_detection_dataset(std::istream& in, ParseMode mode) {
  const json doc = detail::parse_json_stream(in, "dataset");
  if (!doc.is_object() || !doc.contains("categories") ||
      !doc.contains("images") || !doc.contains("annotations")) {
    throw format_error(
        "dataset: expected top-level keys categories/images/annotations");
  }

  ParseResult result;
  Dataset& d = result.dataset;

  try {
    for (const auto& c : doc["categories"]) {
      const std::string ctx = "category " + std::to_string(d.class_table.size());
      const auto id = static_cast<int>(detail::require_int(c, "id", ctx));
      std::string name = c.contains("name") ? c["name"].get<std::string>() : "";
      d.class_table.entries.push_back({id, std::move(name)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("dataset categories: ") + e.what());
  }
  if (!d.class_table.contiguous()) {
    throw format_error("dataset: category ids must be contiguous from 0");
  }

  // Record-level issues throw format_error; lenient mode turns each into a
  // dropped record, strict mode propagates with the record index attached.
  std::map<std::int64_t, std::size_t> image_index;
  std::size_t record_no = 0;
  for (const auto& im : doc["images"]) {
    const std::string ctx = "image record " + std::to_string(record_no++);
    try {
      ImageRecord rec;
      rec.image_id = detail::require_int(im, "id", ctx);
      rec.width = static_cast<int>(detail::require_int(im, "width", ctx));
      rec.height = static_cast<int>(detail::require_int(im, "height", ctx));
      if (rec.width <= 0 || rec.height <= 0) {
        throw format_error(ctx + ": non-positive dimensions");
      }
      if (im.contains("country")) rec.country = im["country"].get<std::string>();
      if (im.contains("lat") != im.contains("lon")) {
        throw format_error(ctx + ": lat and lon must appear together");
      }
      if (im.contains("lat")) {
        GeoPoint g{detail::require_number(im, "lat", ctx),
                   detail::require_number(im, "lon", ctx)};
        if (!g.valid()) throw format_error(ctx + ": lat/lon out of range");
        rec.centroid_geo = g;
      }
      if (im.contains("cluster_id")) {
        rec.cluster_id = static_cast<std::int32_t>(
            detail::require_int(im, "cluster_id", ctx));
      }
      if (image_index.count(rec.image_id)) {
        throw format_error(ctx + ": duplicate image id " +
                           std::to_string(rec.image_id));
      }
      image_index[rec.image_id] = d.images.size();
      d.images.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      if (mode == ParseMode::strict) {
        throw format_error(ctx + ": " + e.what());
      }
      ++result.dropped_records;
    } catch (const format_error&) {
      if (mode == ParseMode::strict) throw;
      ++result.dropped_records;
    }
  }

  std::set<std::int64_t> annotation_ids;
  record_no = 0;
  for (const auto& an : doc["annotations"]) {
    const std::string ctx = "annotation record " + std::to_string(record_no++);
    try {
      Annotation ann;
      ann.id = detail::require_int(an, "id", ctx);
      ann.class_id = static_cast<int>(detail::require_int(an, "category_id", ctx));
      const std::int64_t image_id = detail::require_int(an, "image_id", ctx);

      if (annotation_ids.count(ann.id)) {
        throw format_error(ctx + ": duplicate annotation id " +
                           std::to_string(ann.id));
      }
      if (!d.class_table.contains(ann.class_id)) {
        throw format_error(ctx + ": unknown category_id " +
                           std::to_string(ann.class_id));
      }
      auto img_it = image_index.find(image_id);
      if (img_it == image_index.end()) {
        throw format_error(ctx + ": unknown image_id " + std::to_string(image_id));
      }
      ImageRecord& img = d.images[img_it->second];

      const int geom_keys = static_cast<int>(an.contains("bbox")) +
                            static_cast<int>(an.contains("point")) +
                            static_cast<int>(an.contains("obb"));
      if (geom_keys != 1) {
        throw format_error(ctx + ": expected exactly one of bbox/point/obb");
      }

      bool clamped = false;
      auto clamp_box = [&](BBox b) -> BBox {
        const double w = static_cast<double>(img.width);
        const double h = static_cast<double>(img.height);
        BBox c{std::clamp(b.xmin, 0.0, w), std::clamp(b.ymin, 0.0, h),
               std::clamp(b.xmax, 0.0, w), std::clamp(b.ymax, 0.0, h)};
        if (!(c.xmin < c.xmax && c.ymin < c.ymax)) {
          throw format_error(ctx + ": box lies entirely outside the image");
        }
        clamped = (c != b);
        return c;
      };

      if (an.contains("bbox")) {
        const auto& bb = an["bbox"];
        if (!bb.is_array() || bb.size() != 4) {
          throw format_error(ctx + ": bbox must be [x,y,w,h]");
        }
        const double x = bb[0].get<double>(), y = bb[1].get<double>();
        const double w = bb[2].get<double>(), h = bb[3].get<double>();
        if (!(std::isfinite(x) && std::isfinite(y) && w > 0.0 && h > 0.0)) {
          throw format_error(ctx + ": bbox must have positive width and height");
        }
        ann.geometry = clamp_box({x, y, x + w, y + h});
      } else if (an.contains("obb")) {
        const auto& ob = an["obb"];
        if (!ob.is_array() || ob.size() != 8) {
          throw format_error(ctx + ": obb must be [x1,y1,...,x4,y4]");
        }
        OrientedBox obox;
        for (std::size_t i = 0; i < 4; ++i) {
          obox.corners[i] = {ob[2 * i].get<double>(), ob[2 * i + 1].get<double>()};
        }
        BBox b;
        try {
          b = mbr(obox);
        } catch (const error& e) {
          throw format_error(ctx + ": " + e.what());
        }
        ann.geometry = clamp_box(b);
      } else {
        const auto& pt = an["point"];
        if (!pt.is_array() || pt.size() != 2) {
          throw format_error(ctx + ": point must be [x,y]");
        }
        PixelPoint p{pt[0].get<double>(), pt[1].get<double>()};
        if (!p.finite()) {
          throw format_error(ctx + ": point coordinates must be finite");
        }
        ann.geometry = p;
      }

      if (an.contains("source_geo")) {
        const auto& sg = an["source_geo"];
        if (!sg.is_array() || sg.size() != 2) {
          throw format_error(ctx + ": source_geo must be [lat,lon]");
        }
        GeoPoint g{sg[0].get<double>(), sg[1].get<double>()};
        if (!g.valid()) throw format_error(ctx + ": source_geo out of range");
        ann.source_geo = g;
      }
      if (an.contains("source_point")) {
        const auto& sp = an["source_point"];
        if (!sp.is_array() || sp.size() != 2) {
          throw format_error(ctx + ": source_point must be [x,y]");
        }
        ann.source_point = PixelPoint{sp[0].get<double>(), sp[1].get<double>()};
      }
      if (an.contains("score")) {
        const double s = an["score"].get<double>();
        if (!(std::isfinite(s) && s >= 0.0 && s <= 1.0)) {
          throw format_error(ctx + ": score outside [0,1]");
        }
        ann.score = s;
      }
      if (an.contains("provenance")) {
        const std::string p = an["provenance"].get<std::string>();
        if (p == "pseudo") {
          ann.provenance = Provenance::pseudo;
        } else if (p != "manual") {
          throw format_error(ctx + ": provenance must be manual or pseudo");
        }
      }

      annotation_ids.insert(ann.id);
      if (clamped) ++result.clamped_boxes;
      img.annotations.push_back(std::move(ann));
    } catch (const nlohmann::json::exception& e) {
      if (mode == ParseMode::strict) {
        throw format_error(ctx + ": " + e.what());
      }
      ++result.dropped_records;
    } catch (const format_error&) {
      if (mode == ParseMode::strict) throw;
      ++result.dropped_records;
    }
  }
  return result;
}

inline json dataset_to_json(const Dataset& d) {
  json doc;
  doc["categories"] = json::array();
  for (const auto& c : d.class_table.entries) {
    doc["categories"].push_back({{"id", c.id}, {"name", c.name}});
  }
  doc["images"] = json::array();
  doc["annotations"] = json::array();
  for (const auto& img : d.images) {
    json im;
    im["id"] = img.image_id;
    im["width"] = img.width;
    im["height"] = img.height;
    if (img.country) im["country"] = *img.country;
    if (img.centroid_geo) {
      im["lat"] = img.centroid_geo->lat;
      im["lon"] = img.centroid_geo->lon;
    }
    if (img.cluster_id) im["cluster_id"] = *img.cluster_id;
    doc["images"].push_back(std::move(im));

    for (const auto& ann : img.annotations) {
      json a;
      a["id"] = ann.id;
      a["image_id"] = img.image_id;
      a["category_id"] = ann.class_id;
      if (ann.has_box()) {
        const BBox& b = ann.box();
        a["bbox"] = detail::coords({b.xmin, b.ymin, b.width(), b.height()});
      } else {
        a["point"] = detail::coords({ann.point().x, ann.point().y});
      }
      if (ann.source_geo) {
        a["source_geo"] = detail::coords({ann.source_geo->lat, ann.source_geo->lon});
      }
      if (ann.source_point) {
        a["source_point"] = detail::coords({ann.source_point->x, ann.source_point->y});
      }
      if (ann.score) a["score"] = *ann.score;
      if (ann.provenance == Provenance::pseudo) a["provenance"] = "pseudo";
      doc["annotations"].push_back(std::move(a));
    }
  }
  return doc;
}

inline void write_detection_dataset(const Dataset& d, std::ostream& out) {
  out << dataset_to_json(d).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Point collections: either a GeoJSON FeatureCollection of Point features
// with properties.category_id, or a pixel-space list {"points":[{image_id,
// x,y,category_id}]}. The two forms may not mix.
// ---------------------------------------------------------------------------

struct PointEntry {
  std::variant<GeoPoint, PixelPoint> location;
  int class_id = 0;
  std::optional<std::int64_t> image_id;  // pixel-space entries only

  bool is_geo() const { return std::holds_alternative<GeoPoint>(location); }
  const GeoPoint& geo() const { return std::get<GeoPoint>(location); }
  const PixelPoint& pixel() const { return std::get<PixelPoint>(location); }

  friend bool operator==(const PointEntry&, const PointEntry&) = default;
};

inline std::vector<PointEntry> parse_point_collection(std::istream& in) {
  const json doc = detail::parse_json_stream(in, "point collection");
  const bool has_features = doc.is_object() && doc.contains("features");
  const bool has_points = doc.is_object() && doc.contains("points");
  if (has_features && has_points) {
    throw format_error("point collection: geographic and pixel forms may not mix");
  }
  if (!has_features && !has_points) {
    throw format_error(
        "point collection: expected a GeoJSON FeatureCollection or a 'points' list");
  }

  std::vector<PointEntry> out;
  std::size_t idx = 0;
  try {
    if (has_features) {
      for (const auto& f : doc["features"]) {
        const std::string ctx = "feature " + std::to_string(idx++);
        if (!f.contains("geometry") || f["geometry"]["type"] != "Point") {
          throw format_error(ctx + ": expected a Point geometry");
        }
        const auto& coords = f["geometry"]["coordinates"];
        if (!coords.is_array() || coords.size() != 2) {
          throw format_error(ctx + ": coordinates must be [lon,lat]");
        }
        GeoPoint g{coords[1].get<double>(), coords[0].get<double>()};
        if (!g.valid()) {
          throw format_error(ctx + ": lat/lon out of range");
        }
        PointEntry e;
        e.location = g;
        if (f.contains("properties") && f["properties"].is_object() &&
            f["properties"].contains("category_id")) {
          e.class_id = f["properties"]["category_id"].get<int>();
        }
        out.push_back(std::move(e));
      }
    } else {
      for (const auto& p : doc["points"]) {
        const std::string ctx = "point " + std::to_string(idx++);
        if (p.contains("lat") || p.contains("lon")) {
          throw format_error(ctx + ": geographic and pixel forms may not mix");
        }
        PointEntry e;
        e.image_id = detail::require_int(p, "image_id", ctx);
        e.location = PixelPoint{detail::require_number(p, "x", ctx),
                                detail::require_number(p, "y", ctx)};
        if (p.contains("category_id")) e.class_id = p["category_id"].get<int>();
        out.push_back(std::move(e));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("point collection record " + std::to_string(idx) + ": " +
                       e.what());
  }
  return out;
}

inline void write_point_collection(const std::vector<PointEntry>& points,
                                   std::ostream& out) {
  bool any_geo = false, any_pixel = false;
  for (const auto& p : points) (p.is_geo() ? any_geo : any_pixel) = true;
  if (any_geo && any_pixel) {
    throw validation_error("point collection: geographic and pixel forms may not mix");
  }

  json doc;
  if (!any_pixel) {
    doc["type"] = "FeatureCollection";
    doc["features"] = json::array();
    for (const auto& p : points) {
      json f;
      f["type"] = "Feature";
      f["geometry"] = {{"type", "Point"},
                       {"coordinates", detail::coords({p.geo().lon, p.geo().lat})}};
      f["properties"] = {{"category_id", p.class_id}};
      doc["features"].push_back(std::move(f));
    }
  } else {
    doc["points"] = json::array();
    for (const auto& p : points) {
      doc["points"].push_back({{"image_id", p.image_id.value_or(0)},
                               {"x", p.pixel().x},
                               {"y", p.pixel().y},
                               {"category_id", p.class_id}});
    }
  }
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Predictions: [{image_id, category_id, bbox:[x,y,w,h], score}]. An image
// with no entry simply has zero detections. Output order is stable by
// (image_id, descending score, input index).
// ---------------------------------------------------------------------------

inline std::vector<Detection> parse_predictions(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return {};  // empty file means zero detections
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw format_error(std::string("predictions: ") + e.what());
  }
  if (!doc.is_array()) {
    throw format_error("predictions: expected a top-level list");
  }

  std::vector<Detection> out;
  std::size_t idx = 0;
  try {
    for (const auto& p : doc) {
      const std::string ctx = "prediction " + std::to_string(idx++);
      Detection det;
      det.image_id = detail::require_int(p, "image_id", ctx);
      det.class_id = static_cast<int>(detail::require_int(p, "category_id", ctx));
      if (!p.contains("bbox") || !p["bbox"].is_array() || p["bbox"].size() != 4) {
        throw format_error(ctx + ": bbox must be [x,y,w,h]");
      }
      const auto& bb = p["bbox"];
      const double x = bb[0].get<double>(), y = bb[1].get<double>();
      const double w = bb[2].get<double>(), h = bb[3].get<double>();
      if (!(std::isfinite(x) && std::isfinite(y) && w > 0.0 && h > 0.0)) {
        throw format_error(ctx + ": bbox must have positive width and height");
      }
      det.box = {x, y, x + w, y + h};
      det.score = detail::require_number(p, "score", ctx);
      if (!(std::isfinite(det.score) && det.score >= 0.0 && det.score <= 1.0)) {
        throw format_error(ctx + ": score outside [0,1]");
      }
      out.push_back(det);
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("prediction record " + std::to_string(idx) + ": " +
                       e.what());
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.score > b.score;
  });
  return out;
}

inline void write_predictions(const std::vector<Detection>& dets, std::ostream& out) {
  json doc = json::array();
  for (const auto& d : dets) {
    doc.push_back({{"image_id", d.image_id},
                   {"category_id", d.class_id},
                   {"bbox", detail::coords({d.box.xmin, d.box.ymin, d.box.width(),
                                            d.box.height()})},
                   {"score", d.score}});
  }
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Corpus filter: retain images with width <= max_dim AND height <= max_dim
// AND at most max_annotations annotations ("higher than" / "more than" drop).
// ---------------------------------------------------------------------------

inline std::pair<Dataset, std::size_t> filter_fair1m(
    const Dataset& d, double max_dim = 2000.0, std::size_t max_annotations = 100) {
  Dataset out;
  out.class_table = d.class_table;
  std::size_t dropped = 0;
  for (const auto& img : d.images) {
    const bool keep = static_cast<double>(img.width) <= max_dim &&
                      static_cast<double>(img.height) <= max_dim &&
                      img.annotations.size() <= max_annotations;
    if (keep) {
      out.images.push_back(img);
    } else {
      ++dropped;
    }
  }
  return {std::move(out), dropped};
}

// ---------------------------------------------------------------------------
// Manifests: simple delimiter-separated text with a header row.
// ---------------------------------------------------------------------------

inline void write_split_manifest(const SplitAssignment& split, std::ostream& out) {
  out << "image_id,split\n";
  for (const auto& [id, s] : split.by_image) {
    out << id << ',' << to_string(s) << '\n';
  }
}

inline SplitAssignment read_split_manifest(std::istream& in) {
  SplitAssignment out;
  std::string line;
  if (!std::getline(in, line) || line != "image_id,split") {
    throw format_error("split manifest: expected header 'image_id,split'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw format_error("split manifest line " + std::to_string(line_no) +
                         ": expected 'image_id,split'");
    }
    std::int64_t id = 0;
    try {
      id = std::stoll(line.substr(0, comma));
    } catch (const std::exception&) {
      throw format_error("split manifest line " + std::to_string(line_no) +
                         ": bad image id");
    }
    const auto split = split_from_string(line.substr(comma + 1));
    if (!split) {
      throw format_error("split manifest line " + std::to_string(line_no) +
                         ": unknown split '" + line.substr(comma + 1) + "'");
    }
    out.by_image[id] = *split;
  }
  return out;
}

inline void write_label_mode_manifest(const LabelModeAssignment& modes,
                                      std::ostream& out) {
  out << "image_id,mode\n";
  for (const auto& [id, m] : modes.by_image) {
    out << id << ',' << to_string(m) << '\n';
  }
}

inline LabelModeAssignment read_label_mode_manifest(std::istream& in) {
  LabelModeAssignment out;
  std::string line;
  if (!std::getline(in, line) || line != "image_id,mode") {
    throw format_error("label-mode manifest: expected header 'image_id,mode'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw format_error("label-mode manifest line " + std::to_string(line_no) +
                         ": expected 'image_id,mode'");
    }
    std::int64_t id = 0;
    try {
      id = std::stoll(line.substr(0, comma));
    } catch (const std::exception&) {
      throw format_error("label-mode manifest line " + std::to_string(line_no) +
                         ": bad image id");
    }
    const auto mode = label_mode_from_string(line.substr(comma + 1));
    if (!mode) {
      throw format_error("label-mode manifest line " + std::to_string(line_no) +
                         ": unknown mode '" + line.substr(comma + 1) + "'");
    }
    out.by_image[id] = *mode;
  }
  return out;
}

inline void write_cluster_manifest(const ClusterAssignment& assignment,
                                   std::ostream& out) {
  out << "point_index,cluster_id\n";
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    out << i << ',' << assignment.label_or_noise(i) << '\n';
  }
}

inline ClusterAssignment read_cluster_manifest(std::istream& in) {
  ClusterAssignment out;
  std::string line;
  if (!std::getline(in, line) || line != "point_index,cluster_id") {
    throw format_error("cluster manifest: expected header 'point_index,cluster_id'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw format_error("cluster manifest line " + std::to_string(line_no) +
                         ": expected 'point_index,cluster_id'");
    }
    std::int64_t cid = 0;
    try {
      cid = std::stoll(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw format_error("cluster manifest line " + std::to_string(line_no) +
                         ": bad cluster id");
    }
    if (cid < 0) {
      out.labels.push_back(std::nullopt);
    } else {
      out.labels.push_back(static_cast<std::int32_t>(cid));
      out.cluster_count = std::max(out.cluster_count,
                                   static_cast<std::int32_t>(cid) + 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string() + " for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  return out;
}

inline ParseResult load_detection_dataset(const std::filesystem::path& path,
                                          ParseMode mode = ParseMode::strict) {
  auto in = open_input(path);
  return parse_detection_dataset(in, mode);
}

inline void save_detection_dataset(const Dataset& d,
                                   const std::filesystem::path& path) {
  auto out = open_output(path);
  write_detection_dataset(d, out);
}

inline std::vector<PointEntry> load_point_collection(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_point_collection(in);
}

inline std::vector<Detection> load_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_predictions(in);
}

// ---------------------------------------------------------------------------
// Export: one dataset file per split plus the two manifests. Weak train
// images are written with point annotations only (boxes project to their
// centers); strong images keep boxes. Output is byte-stable for fixed input.
// ---------------------------------------------------------------------------

struct ExportManifest {
  std::vector<std::filesystem::path> files;
};

inline ExportManifest export_artifacts(const Dataset& d,
                                       const SplitAssignment& split,
                                       const LabelModeAssignment& modes,
                                       const std::filesystem::path& out_dir) {
  std::set<std::int64_t> known;
  for (const auto& img : d.images) known.insert(img.image_id);
  for (const auto& [id, s] : split.by_image) {
    if (!known.count(id)) {
      throw validation_error("split manifest references unknown image_id " +
                             std::to_string(id));
    }
  }
  for (const auto& [id, m] : modes.by_image) {
    auto it = split.by_image.find(id);
    if (it == split.by_image.end() || it->second != Split::train) {
      throw validation_error("label-mode manifest entry " + std::to_string(id) +
                             " is not a train image");
    }
  }
  for (const auto& img : d.images) {
    auto it = split.by_image.find(img.image_id);
    if (it == split.by_image.end()) {
      throw validation_error("image " + std::to_string(img.image_id) +
                             " missing from split manifest");
    }
    if (it->second == Split::train && !modes.by_image.count(img.image_id)) {
      throw validation_error("train image " + std::to_string(img.image_id) +
                             " missing from label-mode manifest");
    }
  }

  std::filesystem::create_directories(out_dir);
  ExportManifest manifest;

  for (Split s : kAllSplits) {
    Dataset part;
    part.class_table = d.class_table;
    for (const auto& img : d.images) {
      if (split.by_image.at(img.image_id) != s) continue;
      ImageRecord rec = img;
      if (s == Split::train &&
          modes.by_image.at(img.image_id) == LabelMode::weak) {
        for (auto& ann : rec.annotations) {
          if (ann.has_box()) ann.geometry = box_center(ann.box());
        }
      }
      part.images.push_back(std::move(rec));
    }
    if (part.images.empty()) continue;
    const auto path = out_dir / (std::string(to_string(s)) + ".json");
    save_detection_dataset(part, path);
    manifest.files.push_back(path);
  }

  {
    const auto path = out_dir / "split.csv";
    auto out = open_output(path);
    write_split_manifest(split, out);
    manifest.files.push_back(path);
  }
  {
    const auto path = out_dir / "label_modes.csv";
    auto out = open_output(path);
    write_label_mode_manifest(modes, out);
    manifest.files.push_back(path);
  }
  return manifest;
}

}  // namespace geoweak
