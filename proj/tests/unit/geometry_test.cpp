#include <gtest/gtest.h>

#include <sstream>

#include "layoutfuse/dataset.hpp"
#include "layoutfuse/error.hpp"
#include "layoutfuse/geometry.hpp"
#include "layoutfuse/random.hpp"
#include "oracles.hpp"

using namespace layoutfuse;

TEST(Iou, IdenticalAndDisjoint) {
  const BoundingBox a{0.1, 0.2, 0.4, 0.6};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {0.5, 0.7, 0.9, 0.9}), 0.0);
}

TEST(Iou, ShiftedSquaresMatchRaster) {
  const BoundingBox a{0, 0, 0.2, 0.2}, b{0.1, 0.1, 0.3, 0.3};
  EXPECT_NEAR(oracle::raster_iou(a, b), 1.0 / 7.0, 1e-3);
  EXPECT_NEAR(iou(a, b), 0.142857142857, 1e-9);
}

TEST(Giou, Values) {
  const BoundingBox a{0, 0, 0.2, 0.2}, b{0.1, 0.1, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(giou(a, a), 1.0);
  // hull 0.09, union 0.07
  EXPECT_NEAR(giou(a, b), 1.0 / 7.0 - 0.02 / 0.09, 1e-12);
  EXPECT_NEAR(giou(a, b), oracle::raster_giou(a, b), 2e-3);
  const double far = giou({0, 0, 0.1, 0.1}, {0.9, 0.9, 1, 1});
  EXPECT_LT(far, -0.9);
  EXPECT_GE(far, -1.0);
}

TEST(Iou, RandomPairsAgainstRaster) {
  Rng rng(11);
  for (int i = 0; i < 40; ++i) {
    const auto a = oracle::random_box(rng, 0.05), b = oracle::random_box(rng, 0.05);
    const double v = iou(a, b);
    EXPECT_NEAR(v, oracle::raster_iou(a, b, 1000), 1e-2) << i;
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LE(giou(a, b), v + 1e-15);
  }
}

TEST(Iou, PropertiesOnManyPairs) {
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const auto a = oracle::random_box(rng), b = oracle::random_box(rng);
    const double v = iou(a, b);
    ASSERT_DOUBLE_EQ(v, iou(b, a));
    ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    ASSERT_LE(giou(a, b), v + 1e-15);
    if (!(a == b)) ASSERT_LT(v, 1.0);
  }
}

TEST(Iou, GrowsAsOverlappingGapCloses) {
  const BoundingBox a{0.1, 0.1, 0.4, 0.4};
  double prev = -1.0;
  for (int s = 10; s >= 0; --s) {
    const double dx = 0.02 * s;
    const double v = iou(a, {0.1 + dx, 0.1, 0.4 + dx, 0.4});
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(prev, 1.0);
}

TEST(Giou, EqualsIouUnderContainment) {
  const BoundingBox outer{0.1, 0.1, 0.8, 0.9}, inner{0.2, 0.3, 0.5, 0.6};
  EXPECT_NEAR(giou(outer, inner), iou(outer, inner), 1e-15);
}

TEST(Box, ClampCountsMovedCoordinates) {
  BoundingBox b{-0.1, 0.2, 1.3, 0.5};
  EXPECT_EQ(clamp_to_unit(b), 2);
  EXPECT_EQ(b, (BoundingBox{0.0, 0.2, 1.0, 0.5}));
  EXPECT_TRUE(is_valid(b));
  EXPECT_FALSE(is_valid({0.5, 0.2, 0.5, 0.4}));
}

TEST(Dataset, EmptyStreamGivesNoPages) {
  std::istringstream in("");
  EXPECT_TRUE(read_dataset(in).pages.empty());
}

TEST(Dataset, OneLineRoundTrip) {
  const std::string line =
      R"({"page_id":"p1","ocr_blocks":[{"bbox":[0.1,0.1,0.5,0.2],"text":"Figure 1: x","is_bold":true}],)"
      R"("teacher":[{"bbox":[0.1,0.1,0.5,0.2],"type":"caption","confidence":0.8,"coord_var":0.0004}],)"
      R"("llm":[{"bbox":[0.12,0.1,0.5,0.21],"type":"caption","score":0.9,"q_text":0.5,"q_spatial":0.8}]})";
  const Page p = parse_page(line);
  EXPECT_EQ(p.page_id, "p1");
  ASSERT_EQ(p.teacher.size(), 1u);
  EXPECT_DOUBLE_EQ(p.teacher[0].confidence, 0.8);
  EXPECT_DOUBLE_EQ(*p.teacher[0].coord_variance, 0.0004);
  EXPECT_DOUBLE_EQ(p.llm[0].q_text, 0.5);
  EXPECT_TRUE(p.ocr_blocks[0].is_bold);
  EXPECT_FALSE(p.ground_truth.has_value());
  EXPECT_EQ(parse_page(serialize_page(p)), p);
}

TEST(Dataset, RejectsInvertedBoxNamingPage) {
  const std::string line = R"({"page_id":"bad-7","teacher":[{"bbox":[0.6,0.1,0.5,0.2],"type":"text","confidence":0.5}],"llm":[]})";
  try {
    (void)parse_page(line);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("bad-7"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("teacher[0]"), std::string::npos) << e.what();
  }
}

TEST(Dataset, ParseErrorNamesLine) {
  std::istringstream in("\n{\"page_id\":\"a\",\"teacher\":[],\"llm\":[]}\n{oops\n");
  try {
    (void)read_dataset(in);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, ClampsAndCountsOutOfRange) {
  std::istringstream in(R"({"page_id":"a","teacher":[{"bbox":[-0.01,0.1,1.02,0.2],"type":"text","confidence":0.5}],"llm":[]})");
  const auto r = read_dataset(in);
  EXPECT_EQ(r.clamped_coordinates, 2u);
  EXPECT_DOUBLE_EQ(r.pages[0].teacher[0].box.x1, 0.0);
}

TEST(Dataset, RejectsDuplicatePageIds) {
  std::istringstream in("{\"page_id\":\"a\",\"teacher\":[],\"llm\":[]}\n{\"page_id\":\"a\",\"teacher\":[],\"llm\":[]}\n");
  EXPECT_THROW((void)read_dataset(in), DatasetError);
}

TEST(Dataset, SaveLoadIsBitExact) {
  Rng rng(3);
  std::vector<Page> pages;
  for (std::size_t i = 0; i < 50; ++i) pages.push_back(oracle::random_page(rng, i, true));
  pages[3].ground_truth = std::vector<GroundTruthAnnotation>{{{0.1, 0.1, 0.2, 0.3}, "table"}};
  pages[4].refined = std::vector<FusedLabel>{{{0.1, 0.1, 0.2, 0.3}, "caption", 0.7, Provenance::kLlmSoft, 0.2, std::nullopt, 1}};
  std::ostringstream out;
  write_dataset(out, pages);
  std::istringstream in(out.str());
  EXPECT_EQ(read_dataset(in).pages, pages);
}

TEST(Dataset, TaxonomyResolvesAliases) {
  std::istringstream in(R"({"page_id":"a","teacher":[{"bbox":[0.1,0.1,0.2,0.2],"type":"page-header","confidence":0.5}],"llm":[]})");
  const Taxonomy tax = Taxonomy::doclaynet();
  EXPECT_EQ(read_dataset(in, &tax).pages[0].teacher[0].category, "header");
  std::istringstream bad(R"({"page_id":"a","teacher":[{"bbox":[0.1,0.1,0.2,0.2],"type":"banner","confidence":0.5}],"llm":[]})");
  EXPECT_THROW((void)read_dataset(bad, &tax), DatasetError);
}
