#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "motsmine/errors.hpp"
#include "motsmine/flow.hpp"
#include "motsmine/mask.hpp"
#include "oracles.hpp"

namespace motsmine {
namespace {

using testing::block;
using testing::Grid;

TEST(Mask, AreaOfEmptyFullAndBlock) {
  EXPECT_EQ(mask_area(Mask(4, 4)), 0u);
  EXPECT_EQ(mask_area(Mask::rectangle(4, 4, 0, 0, 4, 4)), 16u);
  EXPECT_EQ(mask_area(block(4, 4, 1, 1, 3, 3).to_mask()), 4u);
}

TEST(Mask, CanonicalRuns) {
  EXPECT_EQ(Mask(4, 4).runs(), (std::vector<std::uint32_t>{16}));
  EXPECT_EQ(Mask::rectangle(4, 4, 0, 0, 4, 4).runs(), (std::vector<std::uint32_t>{0, 16}));
  // Column 0 rows 1..2 set: 1 zero, 2 ones, then 13 zeros.
  EXPECT_EQ(block(4, 4, 1, 0, 3, 1).to_mask().runs(), (std::vector<std::uint32_t>{1, 2, 13}));
  // An interior empty run is accepted and merged away.
  EXPECT_EQ(Mask::from_runs(2, 2, {1, 0, 3}), Mask(2, 2));
}

TEST(Mask, FromRunsRejectsBadCounts) {
  EXPECT_THROW(Mask::from_runs(4, 4, {3, 4}), ValidationError);
  EXPECT_THROW(Mask::from_runs(4, 4, {8, 0, 0, 8}), ValidationError);
  EXPECT_NO_THROW(Mask::from_runs(4, 4, {0, 16}));
}

TEST(Mask, RoundTripOnRandomGrids) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> side(1, 64);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Grid g = testing::random_grid(rng, side(rng), side(rng), density(rng));
    const Mask m = g.to_mask();
    ASSERT_EQ(Grid::from_mask(m), g) << "trial " << trial;
    ASSERT_EQ(Mask::from_runs(m.height(), m.width(), m.runs()), m);
  }
}

TEST(MaskIou, Examples) {
  const Mask a = block(4, 4, 0, 0, 2, 2).to_mask();
  EXPECT_EQ(mask_iou(a, a), 1.0);
  EXPECT_EQ(mask_iou(a, block(4, 4, 2, 2, 4, 4).to_mask()), 0.0);
  // Columns {0,1} vs {1,2}, rows {0,1}: 2 shared of 6.
  const Mask b = block(4, 4, 0, 1, 2, 3).to_mask();
  EXPECT_DOUBLE_EQ(mask_iou(a, b), 2.0 / 6.0);
  EXPECT_EQ(mask_iou(Mask(4, 4), Mask(4, 4)), 0.0);
  EXPECT_THROW(mask_iou(a, Mask(4, 5)), ValidationError);
}

TEST(MaskIou, MatchesPixelOracleSymmetricAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> side(1, 24);
  for (int trial = 0; trial < 500; ++trial) {
    const std::int64_t h = side(rng), w = side(rng);
    const Grid ga = testing::random_grid(rng, h, w, 0.4);
    const Grid gb = testing::random_grid(rng, h, w, 0.4);
    const Mask a = ga.to_mask(), b = gb.to_mask();
    const double v = mask_iou(a, b);
    ASSERT_EQ(v, testing::iou(ga, gb));
    ASSERT_EQ(v, mask_iou(b, a));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v == 1.0, ga == gb && testing::count(ga) > 0);
    ASSERT_EQ(intersection_area(a, b), testing::count_and(ga, gb));
    ASSERT_EQ(Grid::from_mask(mask_and(a, b)).px.size(), ga.px.size());
    ASSERT_EQ(mask_area(mask_or(a, b)), testing::count(ga) + testing::count(gb) - testing::count_and(ga, gb));
  }
}

TEST(WarpMask, ZeroFlowIsIdentity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mask m = testing::random_grid(rng, 9, 13, 0.5).to_mask();
    EXPECT_EQ(warp_mask(m, FlowField(9, 13)), m);
  }
}

TEST(WarpMask, ConstantShift) {
  const Mask col2 = block(4, 4, 0, 2, 4, 3).to_mask();
  EXPECT_EQ(warp_mask(col2, FlowField(4, 4, {1.0f, 0.0f})), block(4, 4, 0, 1, 4, 2).to_mask());
  const Mask col0 = block(4, 4, 0, 0, 4, 1).to_mask();
  EXPECT_EQ(warp_mask(col0, FlowField(4, 4, {-1.0f, 0.0f})), block(4, 4, 0, 1, 4, 2).to_mask());
  EXPECT_EQ(warp_mask(col0, FlowField(4, 4, {1.0f, 0.0f})), Mask(4, 4));
}

TEST(WarpMask, RoundsHalfAwayFromZeroAndSkipsNonFinite) {
  const Mask col1 = block(3, 4, 0, 1, 3, 2).to_mask();
  // 0 + 0.5 rounds to 1: column 0 reads column 1.
  EXPECT_EQ(warp_mask(col1, FlowField(3, 4, {0.5f, 0.0f})), block(3, 4, 0, 0, 3, 1).to_mask());
  // 2 - 0.5 = 1.5 rounds to 2, so nothing lands on column 1 from column 2.
  EXPECT_EQ(warp_mask(col1, FlowField(3, 4, {-0.5f, 0.0f})), block(3, 4, 0, 1, 3, 2).to_mask());
  const float nan = std::numeric_limits<float>::quiet_NaN();
  EXPECT_EQ(warp_mask(col1, FlowField(3, 4, {nan, nan})), Mask(3, 4));
  EXPECT_THROW(warp_mask(col1, FlowField(4, 4)), ValidationError);
}

TEST(WarpMask, NeverReadsOutsideTheGrid) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> d(-6.0f, 6.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t h = 7, w = 9;
    const Grid g = testing::random_grid(rng, h, w, 0.6);
    FlowField f(h, w);
    for (auto& v : f.vectors) v = {d(rng), d(rng)};
    const Grid out = Grid::from_mask(warp_mask(g.to_mask(), f));
    for (std::int64_t r = 0; r < h; ++r) {
      for (std::int64_t c = 0; c < w; ++c) {
        const auto su = static_cast<std::int64_t>(std::round(c + static_cast<double>(f.at(r, c).du)));
        const auto sv = static_cast<std::int64_t>(std::round(r + static_cast<double>(f.at(r, c).dv)));
        const bool inside = su >= 0 && sv >= 0 && su < w && sv < h;
        ASSERT_EQ(out.at(r, c), inside ? g.at(sv, su) : 0);
      }
    }
  }
}

TEST(IntersectionStats, Examples) {
  const Mask s = block(5, 5, 1, 1, 4, 4).to_mask();  // 3x3 = 9 px
  Grid six(5, 5);
  for (std::int64_t r = 1; r < 3; ++r) {
    for (std::int64_t c = 1; c < 4; ++c) six.at(r, c) = 1;  // rows 1-2: 6 px of s
  }
  Grid two(5, 5);
  two.at(3, 1) = two.at(3, 2) = 1;  // 2 more px of s, disjoint from `six`
  const std::vector<Mask> warped{six.to_mask(), two.to_mask()};
  EXPECT_EQ(intersection_stats(s, warped), (IntersectionStats{6, 2, 1}));
  EXPECT_EQ(intersection_stats(s, {}), (IntersectionStats{0, 0, 9}));
  const std::vector<Mask> same{s};
  EXPECT_EQ(intersection_stats(s, same), (IntersectionStats{9, 0, 0}));
  const std::vector<Mask> bad{Mask(4, 5)};
  EXPECT_THROW(intersection_stats(s, bad), ValidationError);
}

TEST(IntersectionStats, ConsistentWithPixelCounts) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    const Grid s = testing::random_grid(rng, 8, 8, 0.5);
    std::vector<Grid> ws;
    std::vector<Mask> masks;
    const int n = static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
      ws.push_back(testing::random_grid(rng, 8, 8, 0.3));
      masks.push_back(ws.back().to_mask());
    }
    const IntersectionStats st = intersection_stats(s.to_mask(), masks);
    std::vector<std::uint64_t> overlaps;
    Grid covered(8, 8);
    for (const Grid& w : ws) {
      overlaps.push_back(testing::count_and(s, w));
      for (std::size_t i = 0; i < w.px.size(); ++i) covered.px[i] |= w.px[i];
    }
    std::sort(overlaps.rbegin(), overlaps.rend());
    overlaps.resize(2, 0);
    ASSERT_EQ(st.b1, overlaps[0]);
    ASSERT_EQ(st.b2, overlaps[1]);
    ASSERT_EQ(st.r, testing::count(s) - testing::count_and(s, covered));
    ASSERT_GE(st.b1, st.b2);
    ASSERT_LE(st.r, testing::count(s));
  }
}

TEST(MaskBbox, Examples) {
  EXPECT_EQ(mask_bbox(block(4, 4, 1, 1, 3, 3).to_mask()), (BBox{1, 1, 3, 3}));
  EXPECT_EQ(mask_bbox(Mask::rectangle(3, 5, 0, 0, 3, 5)), (BBox{0, 0, 5, 3}));
  EXPECT_EQ(mask_bbox(Mask(4, 4)), (BBox{0, 0, 0, 0}));
}

TEST(MaskBbox, MatchesDirectScan) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const Grid g = testing::random_grid(rng, 1 + rng() % 12, 1 + rng() % 12, 0.08);
    if (testing::count(g) == 0) continue;
    std::int64_t r0 = g.h, r1 = -1, c0 = g.w, c1 = -1;
    for (std::int64_t r = 0; r < g.h; ++r) {
      for (std::int64_t c = 0; c < g.w; ++c) {
        if (!g.at(r, c)) continue;
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
    ASSERT_EQ(mask_bbox(g.to_mask()),
              (BBox{double(c0), double(r0), double(c1 + 1), double(r1 + 1)}));
  }
}

TEST(BoxIou, Basics) {
  EXPECT_EQ(box_iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(box_iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0);
  EXPECT_EQ(box_iou({0, 0, 2, 2}, {4, 4, 6, 6}), 0.0);
  EXPECT_EQ(box_iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

}  // namespace
}  // namespace motsmine
