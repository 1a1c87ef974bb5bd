#include "geoweak/datamodel.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "geoweak/parsers.hpp"
#include "geoweak/rng.hpp"
#include "support/corpus.hpp"

using namespace geoweak;

namespace {

Dataset two_image_dataset() {
  Dataset d;
  d.class_table.entries.push_back({0, "turbine"});
  ImageRecord a;
  a.image_id = 1;
  a.width = 416;
  a.height = 416;
  Annotation box;
  box.id = 0;
  box.class_id = 0;
  box.geometry = BBox{10, 10, 50, 60};
  a.annotations.push_back(box);
  ImageRecord b;
  b.image_id = 2;
  b.width = 416;
  b.height = 416;
  Annotation point;
  point.id = 1;
  point.class_id = 0;
  point.geometry = PixelPoint{100, 100};
  b.annotations.push_back(point);
  d.images = {a, b};
  return d;
}

bool has_violation(const ValidationReport& r, const std::string& kind) {
  for (const auto& v : r.violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(ValidateDataset, WellFormedHasNoViolations) {
  const auto report = validate_dataset(two_image_dataset());
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.image_count, 2u);
  EXPECT_EQ(report.box_count, 1u);
  EXPECT_EQ(report.point_count, 1u);
}

TEST(ValidateDataset, DegenerateBoxNamesAnnotation) {
  auto d = two_image_dataset();
  d.images[0].annotations[0].geometry = BBox{10, 10, 10, 60};  // xmin == xmax
  const auto report = validate_dataset(d);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, "degenerate-box");
  EXPECT_NE(report.violations[0].message.find("annotation 0"), std::string::npos);
}

TEST(ValidateDataset, DuplicateImageId) {
  auto d = two_image_dataset();
  d.images[1].image_id = d.images[0].image_id;
  const auto report = validate_dataset(d);
  EXPECT_TRUE(has_violation(report, "duplicate-image-id"));
}

TEST(ValidateDataset, OtherViolationKinds) {
  auto d = two_image_dataset();
  d.images[0].annotations[0].class_id = 7;
  d.images[1].annotations[0].id = 0;  // duplicate annotation id
  d.images[1].annotations[0].score = 1.5;
  Annotation oob;
  oob.id = 2;
  oob.class_id = 0;
  oob.geometry = BBox{400, 400, 500, 500};
  d.images[1].annotations.push_back(oob);
  const auto report = validate_dataset(d);
  EXPECT_TRUE(has_violation(report, "unknown-class"));
  EXPECT_TRUE(has_violation(report, "duplicate-annotation-id"));
  EXPECT_TRUE(has_violation(report, "invalid-score"));
  EXPECT_TRUE(has_violation(report, "box-out-of-bounds"));
}

TEST(ValidateDataset, BadClassTable) {
  Dataset d;
  d.class_table.entries.push_back({1, "skipped-zero"});
  EXPECT_TRUE(has_violation(validate_dataset(d), "bad-class-table"));
}

// Round-trip: a dataset that validates cleanly still validates (with equal
// counts) after write + parse.
TEST(ValidateDataset, RoundTripPreservesValidity) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = corpus::random_dataset(rng);
    const auto before = validate_dataset(d);
    ASSERT_TRUE(before.ok());

    std::stringstream buffer;
    write_detection_dataset(d, buffer);
    const auto parsed = parse_detection_dataset(buffer, ParseMode::strict);
    const auto after = validate_dataset(parsed.dataset);
    EXPECT_TRUE(after.ok());
    EXPECT_EQ(after.image_count, before.image_count);
    EXPECT_EQ(after.box_count, before.box_count);
    EXPECT_EQ(after.point_count, before.point_count);
  }
}
