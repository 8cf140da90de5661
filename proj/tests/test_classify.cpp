#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>
#include <random>

#include "hgr/classify.hpp"

using hgr::Direction;
using hgr::FlowSummary;
using hgr::GestureKind;

namespace {

constexpr auto L = Direction::left;
constexpr auto R = Direction::right;
constexpr auto U = Direction::up;
constexpr auto D = Direction::down;
constexpr auto I = Direction::idle;

FlowSummary summary(double sx, double sy) {
  FlowSummary s;
  s.s_x = sx;
  s.s_y = sy;
  s.n_pixels = 1;
  return s;
}

hgr::SegmentationMask full_mask(int w, int h, hgr::Label l = hgr::Label::foreground) {
  return hgr::SegmentationMask(w, h, l);
}

}  // namespace

TEST(SumFlow, ZeroField) {
  const auto s = hgr::sum_flow(hgr::FlowField(4, 4), full_mask(5, 5));
  EXPECT_EQ(s.s_x, 0.0);
  EXPECT_EQ(s.s_y, 0.0);
  EXPECT_EQ(s.n_pixels, 16u);
}

TEST(SumFlow, UniformFlowOnHundredPixels) {
  hgr::FlowField f(10, 10);
  std::fill(f.u.begin(), f.u.end(), 0.01);
  const auto s = hgr::sum_flow(f, full_mask(11, 11));
  EXPECT_EQ(s.n_pixels, 100u);
  // Screen-space motion (1, 0) maps onto the RIGHT diagonal of the sign table.
  EXPECT_NEAR(std::hypot(s.s_x, s.s_y), 1.0, 1e-12);
  EXPECT_NEAR(s.s_x, s.s_y, 1e-12);
  EXPECT_GT(s.s_x, 0.0);
}

TEST(SumFlow, MaskRestrictsToForegroundCells) {
  hgr::FlowField f(6, 6);
  std::fill(f.u.begin(), f.u.end(), 1.0);
  auto mask = full_mask(7, 7, hgr::Label::background);
  mask.at(3, 3) = hgr::Label::foreground;  // touches cells (2..3, 2..3)
  mask.at(0, 6) = hgr::Label::shadow;      // ignored
  const auto s = hgr::sum_flow(f, mask);
  EXPECT_EQ(s.n_pixels, 4u);
  EXPECT_NEAR(std::hypot(s.s_x, s.s_y), 4.0, 1e-12);
  const auto all = hgr::sum_flow(f, mask, hgr::SumMode::unmasked);
  EXPECT_EQ(all.n_pixels, 36u);
}

TEST(SumFlow, EmptyMaskIsZero) {
  hgr::FlowField f(3, 3);
  std::fill(f.v.begin(), f.v.end(), 5.0);
  const auto s = hgr::sum_flow(f, full_mask(4, 4, hgr::Label::background));
  EXPECT_EQ(s.n_pixels, 0u);
  EXPECT_EQ(s.s_x, 0.0);
  EXPECT_EQ(s.s_y, 0.0);
}

TEST(SumFlow, DimensionMismatch) {
  EXPECT_THROW(hgr::sum_flow(hgr::FlowField(3, 3), full_mask(3, 3)), std::invalid_argument);
}

TEST(SumFlow, CardinalMotionsClassifyByName) {
  const hgr::ClassifierConfig cfg;
  const std::pair<std::array<double, 2>, Direction> cases[] = {
      {{1, 0}, R}, {{-1, 0}, L}, {{0, -1}, U}, {{0, 1}, D}};
  for (const auto& [uv, expected] : cases) {
    hgr::FlowField f(4, 4);
    std::fill(f.u.begin(), f.u.end(), uv[0]);
    std::fill(f.v.begin(), f.v.end(), uv[1]);
    EXPECT_EQ(hgr::classify_direction(hgr::sum_flow(f, full_mask(5, 5)), cfg), expected);
  }
}

TEST(ClassifyDirection, SignTable) {
  const hgr::ClassifierConfig cfg;
  EXPECT_EQ(hgr::classify_direction(summary(0.0018, 0.6535), cfg), R);
  EXPECT_EQ(hgr::classify_direction(summary(-0.2038, -0.2887), cfg), L);
  EXPECT_EQ(hgr::classify_direction(summary(0.3968, -0.0634), cfg), D);
  EXPECT_EQ(hgr::classify_direction(summary(-0.0015, 0.1430), cfg), U);
  EXPECT_EQ(hgr::classify_direction(summary(0, 0), cfg), I);
}

TEST(ClassifyDirection, ZeroComponentCountsAsPositive) {
  const hgr::ClassifierConfig cfg;
  EXPECT_EQ(hgr::classify_direction(summary(0.0, 1.0), cfg), R);
  EXPECT_EQ(hgr::classify_direction(summary(0.0, -1.0), cfg), D);
  EXPECT_EQ(hgr::classify_direction(summary(-1.0, 0.0), cfg), U);
  EXPECT_EQ(hgr::classify_direction(summary(1.0, 0.0), cfg), R);
}

TEST(ClassifyDirection, IdleThreshold) {
  hgr::ClassifierConfig cfg;
  cfg.idle_eps = 0.5;
  EXPECT_EQ(hgr::classify_direction(summary(0.3, 0.3), cfg), I);
  EXPECT_EQ(hgr::classify_direction(summary(0.4, 0.4), cfg), R);
}

TEST(ClassifyDirection, PositiveScaleInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> val(-5, 5), scale(1.0, 1000.0);
  const hgr::ClassifierConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    const double sx = val(rng), sy = val(rng), t = scale(rng);
    const auto a = hgr::classify_direction(summary(sx, sy), cfg);
    if (a == I) continue;
    EXPECT_EQ(hgr::classify_direction(summary(t * sx, t * sy), cfg), a);
  }
}

TEST(ClassifierConfig, Validation) {
  EXPECT_THROW((hgr::ClassifierConfig{0.05, 4}.validate()), std::invalid_argument);
  EXPECT_THROW((hgr::ClassifierConfig{-1, 5}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((hgr::ClassifierConfig{0.0, 1}.validate()));
}

TEST(Vote, Examples) {
  const std::vector<Direction> a{R, R, R, D};
  EXPECT_EQ(hgr::vote(a), R);
  const std::vector<Direction> b{U, U, U, U};
  EXPECT_EQ(hgr::vote(b), U);
  const std::vector<Direction> c{L, R};
  EXPECT_EQ(hgr::vote(c), R);
  const std::vector<Direction> d{I, I, I};
  EXPECT_EQ(hgr::vote(d), I);
  const std::vector<Direction> e{I, I, I, L};
  EXPECT_EQ(hgr::vote(e), L);
  EXPECT_THROW(hgr::vote(std::vector<Direction>{}), std::invalid_argument);
}

TEST(Vote, PermutationInvariantWithoutTies) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Direction> w(1 + rng() % 9);
    for (auto& d : w) d = hgr::kAllDirections[rng() % 5];
    std::array<int, 5> count{};
    for (auto d : w) ++count[static_cast<std::size_t>(d)];
    const int best = *std::max_element(count.begin(), count.begin() + 4);
    if (std::count(count.begin(), count.begin() + 4, best) > 1) continue;
    const auto expected = hgr::vote(w);
    std::shuffle(w.begin(), w.end(), rng);
    EXPECT_EQ(hgr::vote(w), expected);
  }
}

TEST(DetectGesture, TableMapping) {
  const hgr::GestureConfig cfg{2, 3};
  const std::vector<Direction> no{L, R, L};
  const auto a = hgr::detect_gesture(no, cfg);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], (hgr::GestureEvent{GestureKind::no, 0, 2}));
  const std::vector<Direction> yes{U, D, U};
  const auto b = hgr::detect_gesture(yes, cfg);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].kind, GestureKind::yes);
}

TEST(DetectGesture, NothingToDetect) {
  EXPECT_TRUE(hgr::detect_gesture(std::vector<Direction>{}, {}).empty());
  EXPECT_TRUE(hgr::detect_gesture(std::vector<Direction>(20, I), {}).empty());
  EXPECT_TRUE(hgr::detect_gesture(std::vector<Direction>(20, L), {}).empty());
  const std::vector<Direction> once{L, L, R, R};
  EXPECT_TRUE(hgr::detect_gesture(once, {}).empty());
}

TEST(DetectGesture, IdleGapsTolerated) {
  const std::vector<Direction> s{L, I, R, I, L};
  const auto ev = hgr::detect_gesture(s, {2, 1});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0], (hgr::GestureEvent{GestureKind::no, 0, 4}));
}

TEST(DetectGesture, LongGapBreaksCandidate) {
  const std::vector<Direction> s{L, I, I, R, I, I, L};
  EXPECT_TRUE(hgr::detect_gesture(s, {2, 1}).empty());
  EXPECT_EQ(hgr::detect_gesture(s, {2, 2}).size(), 1u);
}

TEST(DetectGesture, RunsOfRepeatedDirections) {
  const std::vector<Direction> s{L, L, L, R, R, R, R, L, L, L};
  const auto ev = hgr::detect_gesture(s, {});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start_frame, 0);
  EXPECT_EQ(ev[0].end_frame, 7);
}

TEST(DetectGesture, EventsDoNotOverlap) {
  const std::vector<Direction> s{L, R, L, R, L, U, D, U};
  const auto ev = hgr::detect_gesture(s, {});
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0], (hgr::GestureEvent{GestureKind::no, 0, 2}));
  EXPECT_EQ(ev[1], (hgr::GestureEvent{GestureKind::yes, 5, 7}));
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_GT(ev[i].start_frame, ev[i - 1].end_frame);
}

TEST(DetectGesture, IdleInsertionInvariance) {
  std::mt19937_64 rng(23);
  const hgr::GestureConfig cfg{2, 3};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Direction> base(2 + rng() % 10);
    for (auto& d : base) d = (rng() % 2) ? L : R;
    std::vector<Direction> padded;
    for (auto d : base) {
      padded.push_back(d);
      for (int k = static_cast<int>(rng() % (cfg.max_gap + 1)); k > 0; --k) padded.push_back(I);
    }
    const auto a = hgr::detect_gesture(base, cfg);
    const auto b = hgr::detect_gesture(padded, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].kind, b[i].kind);
  }
}

TEST(ClassifyDirection, SignConsistentReferenceSums) {
  const hgr::ClassifierConfig cfg{0.0, 5};
  const std::tuple<double, double, Direction> rows[] = {
      {0.0018, 0.6535, R},   {0.0022, 0.6550, R},   {0.0027, 0.6564, R},
      {0.0031, -0.0630, D},  {-0.2038, -0.2887, L}, {-0.0495, -0.1421, L},
      {-0.0080, -0.1397, L}, {0.3968, -0.0634, D},  {0.4602, -0.0621, D},
      {-0.0015, 0.1430, U},  {-0.0035, 0.1442, U},  {-0.0046, 0.1446, U},
      {-0.0072, 0.1502, U}};
  for (const auto& [sx, sy, expected] : rows)
    EXPECT_EQ(hgr::classify_direction(summary(sx, sy), cfg), expected) << sx << ", " << sy;
}

TEST(Vote, ReferenceRecognitionGroups) {
  const std::vector<Direction> right{R, R, R, D};
  EXPECT_EQ(hgr::vote(right), R);
  const std::vector<Direction> left{L, L, L, L};
  EXPECT_EQ(hgr::vote(left), L);
  const std::vector<Direction> down{D, R, D, D};
  EXPECT_EQ(hgr::vote(down), D);
  const std::vector<Direction> up{U, U, U, U};
  EXPECT_EQ(hgr::vote(up), U);
}
