// Cross-module integration: the two corpus flows, desk scale.

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "geoweak/geoweak.hpp"

using namespace geoweak;

namespace {

// Raw wind-style corpus: crowdsourced boxes plus standalone OSM-style point
// annotations (pixel location at the turbine base, geo source attached).
// Three planted farms across two countries, one image per turbine pair, plus
// one image whose box misses its point and one negative image.
Dataset raw_wind_corpus() {
  Dataset d;
  d.class_table.entries.push_back({0, "turbine"});

  struct Farm {
    GeoPoint center;
    const char* country;
    double lon;
  };
  const Farm farms[3] = {{{35.0, -118.0}, "US", -118.0},
                         {{41.0, -95.0}, "US", -95.0},
                         {{40.5, -3.5}, "ES", -3.5}};

  std::int64_t image_id = 0;
  std::int64_t ann_id = 0;
  for (int f = 0; f < 3; ++f) {
    for (int k = 0; k < 4; ++k) {
      ImageRecord img;
      img.image_id = image_id++;
      img.width = 416;
      img.height = 416;
      img.country = farms[f].country;
      img.centroid_geo = GeoPoint{farms[f].center.lat, farms[f].lon};
      for (int t = 0; t < 2; ++t) {
        const double x = 40.0 + 150.0 * t;
        const double y = 60.0 + 30.0 * k;
        Annotation box;
        box.id = ann_id++;
        box.class_id = 0;
        box.geometry = BBox{x, y, x + 60, y + 90};
        img.annotations.push_back(box);

        Annotation point;
        point.id = ann_id++;
        point.class_id = 0;
        point.geometry = PixelPoint{x + 30, y + 80};  // turbine base
        point.source_geo = GeoPoint{
            farms[f].center.lat + 0.0002 * (2 * k + t),
            farms[f].center.lon + 0.0001 * t};
        img.annotations.push_back(point);
      }
      d.images.push_back(std::move(img));
    }
  }

  // box that contains no point: whole image dropped by retention
  {
    ImageRecord img;
    img.image_id = image_id++;
    img.width = 416;
    img.height = 416;
    img.country = "US";
    img.centroid_geo = GeoPoint{35.0, -118.0};
    Annotation box;
    box.id = ann_id++;
    box.class_id = 0;
    box.geometry = BBox{10, 10, 40, 40};
    img.annotations.push_back(box);
    Annotation point;
    point.id = ann_id++;
    point.class_id = 0;
    point.geometry = PixelPoint{300, 300};
    point.source_geo = GeoPoint{35.0, -118.0};
    img.annotations.push_back(point);
    d.images.push_back(std::move(img));
  }
  // negative image
  {
    ImageRecord img;
    img.image_id = image_id++;
    img.width = 416;
    img.height = 416;
    img.country = "ES";
    img.centroid_geo = GeoPoint{40.5, -3.5};
    d.images.push_back(std::move(img));
  }
  return d;
}

}  // namespace

TEST(WindFlow, RetentionClusterRegionSplitSourcePointTeacher) {
  const Dataset raw = raw_wind_corpus();
  ASSERT_TRUE(validate_dataset(raw).ok());

  // retention: the missed-box image goes, its point with it; the negative
  // image stays; every kept turbine is one box carrying its source point
  const auto [retained, retention] = retention_filter(raw);
  EXPECT_EQ(retention.dropped_images, 1u);
  EXPECT_EQ(retained.images.size(), 13u);
  for (const auto& img : retained.images) {
    for (const auto& ann : img.annotations) {
      ASSERT_TRUE(ann.has_box());
      ASSERT_TRUE(ann.source_point.has_value());
      EXPECT_TRUE(contains(ann.box(), *ann.source_point));
      EXPECT_TRUE(ann.source_geo.has_value());
    }
  }

  // clustering recovers the three planted farms; the negative image gets a
  // singleton
  const auto refs = extract_geo_points(retained);
  EXPECT_EQ(refs.size(), 24u);  // one per turbine
  std::vector<GeoPoint> pts;
  for (const auto& r : refs) pts.push_back(r.geo);
  const auto assignment = dbscan(pts, {2000.0, 3});
  EXPECT_EQ(assignment.cluster_count, 3);
  const auto [clustered, assign_report] =
      assign_clusters_to_images(retained, assignment);
  EXPECT_TRUE(assign_report.conflicts.empty());
  EXPECT_EQ(assign_report.total_clusters, 4);  // + negative-image singleton

  // region split: west US trains, east US validates, Spain is teacher_eval
  std::vector<RegionRule> rules;
  {
    RegionRule train;
    train.split = Split::train;
    train.countries = {"US"};
    train.lon_max = -98.58;
    RegionRule val;
    val.split = Split::val;
    val.countries = {"US"};
    val.lon_min = -98.58;
    RegionRule teacher;
    teacher.split = Split::teacher_eval;
    teacher.countries = {"ES"};
    RegionRule rest;
    rest.split = Split::test;
    rest.rest = true;
    rules = {train, val, teacher, rest};
  }
  const auto region = split_by_region(clustered, rules);
  EXPECT_TRUE(region.fixes.empty());
  EXPECT_EQ(region.assignment.count(Split::train), 4u);
  EXPECT_EQ(region.assignment.count(Split::val), 4u);
  EXPECT_EQ(region.assignment.count(Split::teacher_eval), 5u);  // + negative

  // half the train images keep boxes; the rest become OSM-point weak labels
  const auto modes =
      sample_label_fractions(clustered, region.assignment, 0.5, 3);
  const auto derived =
      derive_weak_labels(clustered, modes, WeakSource::source_point);
  std::size_t weak_points = 0;
  for (const auto& img : derived.images) {
    auto it = modes.by_image.find(img.image_id);
    if (it == modes.by_image.end() || it->second != LabelMode::weak) continue;
    for (const auto& ann : img.annotations) {
      ASSERT_TRUE(ann.has_point());
      EXPECT_EQ(ann.point(), *ann.source_point);
      ++weak_points;
    }
  }
  EXPECT_EQ(weak_points, 4u);  // 2 weak train images x 2 turbines

  // teacher simulation over the weak subset, scored against hidden truth
  std::set<std::int64_t> weak_ids;
  for (const auto& [id, m] : modes.by_image) {
    if (m == LabelMode::weak) weak_ids.insert(id);
  }
  Dataset weak_truth;
  weak_truth.class_table = clustered.class_table;
  for (const auto& img : clustered.images) {
    if (weak_ids.count(img.image_id)) weak_truth.images.push_back(img);
  }
  const auto pseudo = simulate_pseudo_labels(weak_truth, {0.08, 0.08, 0.0, 2, 2}, 5);
  std::vector<Detection> dets;
  for (const auto& img : pseudo.images) {
    for (const auto& ann : img.annotations) {
      dets.push_back({img.image_id, ann.class_id, ann.box(), *ann.score});
    }
  }
  const auto result = evaluate(dets, weak_truth, {});
  EXPECT_TRUE(result.single_class);
  ASSERT_TRUE(result.map_at(0).has_value());
  EXPECT_GT(*result.map_at(0), 0.5);                // loose boxes still overlap
  EXPECT_GE(*result.map_at(0), *result.map_at(2));  // decay with threshold
}

namespace {

// Oriented-annotation corpus in the multi-class style: obb geometry in the
// file, some images past the size/count limits.
std::string oriented_corpus_json() {
  json doc;
  doc["categories"] = json::array();
  const char* names[5] = {"ship", "vehicle", "airplane", "court", "road"};
  for (int c = 0; c < 5; ++c) {
    doc["categories"].push_back({{"id", c}, {"name", names[c]}});
  }
  doc["images"] = json::array();
  doc["annotations"] = json::array();
  std::int64_t ann_id = 0;
  for (std::int64_t i = 0; i < 30; ++i) {
    const int dim = (i == 7) ? 2048 : 1000;  // image 7 dropped by the filter
    doc["images"].push_back({{"id", i}, {"width", dim}, {"height", dim}});
    const int n = (i == 9) ? 101 : 3;  // image 9 dropped by the filter
    for (int a = 0; a < n; ++a) {
      const double x = 50.0 + 9.0 * a;
      const double y = 80.0 + 7.0 * (a % 10);
      // rotated square around (x, y)
      json obb = json::array();
      const double r = 10.0;
      for (int corner = 0; corner < 4; ++corner) {
        const double angle = (45.0 + 90.0 * corner) * M_PI / 180.0;
        obb.push_back(x + r * std::cos(angle));
        obb.push_back(y + r * std::sin(angle));
      }
      doc["annotations"].push_back({{"id", ann_id++},
                                    {"image_id", i},
                                    {"category_id", static_cast<int>((i + a) % 5)},
                                    {"obb", obb}});
    }
  }
  return doc.dump();
}

}  // namespace

TEST(Fair1mFlow, ObbIngestFilterStratifiedFractionsCenterPoints) {
  std::istringstream in(oriented_corpus_json());
  const auto parsed = parse_detection_dataset(in, ParseMode::strict);
  ASSERT_TRUE(validate_dataset(parsed.dataset).ok());
  // every oriented box became its minimum bounding rectangle
  for (const auto& ann : parsed.dataset.images[0].annotations) {
    ASSERT_TRUE(ann.has_box());
    EXPECT_NEAR(ann.box().width(), 2.0 * 10.0 * std::cos(M_PI / 4.0), 1e-9);
  }

  const auto [filtered, dropped] = filter_fair1m(parsed.dataset);
  EXPECT_EQ(dropped, 2u);
  EXPECT_EQ(filtered.images.size(), 28u);

  // provided-style split: everything in train via manifest round-trip
  SplitAssignment split;
  for (const auto& img : filtered.images) {
    split.by_image[img.image_id] = Split::train;
  }
  const auto modes = sample_label_fractions(filtered, split, 0.25, 11);
  std::size_t strong = 0;
  std::set<int> covered;
  for (const auto& [id, m] : modes.by_image) {
    if (m != LabelMode::strong) continue;
    ++strong;
    for (const auto& ann : filtered.find_image(id)->annotations) {
      covered.insert(ann.class_id);
    }
  }
  EXPECT_EQ(strong, 7u);  // round(0.25 * 28)
  EXPECT_EQ(covered.size(), 5u);  // stratified: every class in a strong image

  // weak labels are box centers here
  const auto derived = derive_weak_labels(filtered, modes, WeakSource::box_center);
  for (const auto& img : derived.images) {
    if (modes.by_image.at(img.image_id) != LabelMode::weak) continue;
    for (const auto& ann : img.annotations) {
      ASSERT_TRUE(ann.has_point());
    }
  }
}
