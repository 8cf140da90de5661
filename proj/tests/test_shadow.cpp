#include <gtest/gtest.h>

#include <random>

#include "hgr/shadow.hpp"
#include "hgr/synth.hpp"

using hgr::Label;

namespace {

std::vector<double> v3(double a, double b, double c) { return {a, b, c}; }

}  // namespace

TEST(Distortion, BrightnessExamples) {
  EXPECT_NEAR(hgr::brightness_distortion(v3(60, 30, 12), v3(100, 50, 20)), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(hgr::brightness_distortion(v3(7, 8, 9), v3(7, 8, 9)), 1.0);
  EXPECT_EQ(hgr::brightness_distortion(v3(0, 50, 0), v3(100, 0, 0)), 0.0);
}

TEST(Distortion, ChromaticityExamples) {
  EXPECT_NEAR(hgr::chromaticity_distortion(v3(30, 15, 6), v3(100, 50, 20)), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(hgr::chromaticity_distortion(v3(0, 50, 0), v3(100, 0, 0)), 50.0);
  const auto d = hgr::distortion(v3(3, 4, 5), v3(3, 4, 0));
  EXPECT_DOUBLE_EQ(d.brightness, 1.0);
  EXPECT_DOUBLE_EQ(d.chromaticity, 5.0);
}

TEST(Distortion, ZeroBackgroundIsAnError) {
  EXPECT_THROW(hgr::distortion(v3(1, 2, 3), v3(0, 0, 0)), hgr::UndefinedDistortionError);
}

TEST(Distortion, GeometricProperties) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> val(0.0, 255.0), scale(0.05, 4.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto fg = v3(val(rng), val(rng), val(rng));
    const auto bg = v3(val(rng) + 1, val(rng) + 1, val(rng) + 1);
    const auto d = hgr::distortion(fg, bg);

    // ||fg||^2 = (BD ||bg||)^2 + CD^2
    const double fg2 = fg[0] * fg[0] + fg[1] * fg[1] + fg[2] * fg[2];
    const double bg2 = bg[0] * bg[0] + bg[1] * bg[1] + bg[2] * bg[2];
    EXPECT_NEAR(d.brightness * d.brightness * bg2 + d.chromaticity * d.chromaticity, fg2, 1e-6 * fg2);

    const double t = scale(rng);
    const auto ds = hgr::distortion(v3(t * fg[0], t * fg[1], t * fg[2]), bg);
    EXPECT_NEAR(ds.brightness, t * d.brightness, 1e-9 * (1 + t * d.brightness));
    EXPECT_NEAR(ds.chromaticity, t * d.chromaticity, 1e-9 * (1 + t * d.chromaticity));

    const auto dc = hgr::distortion(v3(t * bg[0], t * bg[1], t * bg[2]), bg);
    EXPECT_NEAR(dc.chromaticity, 0.0, 1e-9);
  }
}

TEST(ClassifyShadow, Rule) {
  const hgr::ShadowConfig cfg{0.4, 0.95, 10};
  EXPECT_TRUE(hgr::classify_shadow(0.6, 0, cfg));
  EXPECT_FALSE(hgr::classify_shadow(1.0, 0, cfg));
  EXPECT_FALSE(hgr::classify_shadow(0.6, 50, cfg));
  EXPECT_TRUE(hgr::classify_shadow(0.4, 10, cfg));
  EXPECT_FALSE(hgr::classify_shadow(0.39, 0, cfg));
}

TEST(ShadowConfig, Validation) {
  EXPECT_THROW((hgr::ShadowConfig{0.9, 0.5, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((hgr::ShadowConfig{0.4, 1.2, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((hgr::ShadowConfig{0.4, 0.9, 0}.validate()), std::invalid_argument);
}

namespace {

// Static background for `burn` frames, then one frame with the given overlay.
struct Scene {
  hgr::BackgroundModel model{40, 30, 3};
  hgr::SegmentationMask mask;
  hgr::Frame last;
};

Scene run_scene(const hgr::Color& bg, const hgr::Rect& region, const hgr::Color& region_color,
                double noise, int burn = 30) {
  Scene s;
  hgr::GaussianNoise rng(5);
  for (int k = 0; k <= burn; ++k) {
    hgr::Frame f(40, 30, 3, k);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        const auto& c = (k == burn && region.contains(x, y)) ? region_color : bg;
        auto p = f.pixel(x, y);
        for (int i = 0; i < 3; ++i)
          p[i] = static_cast<std::uint8_t>(std::clamp(std::floor(c[i] + noise * rng.next() + 0.5), 0.0, 255.0));
      }
    s.mask = s.model.process_frame(f);
    s.last = f;
  }
  return s;
}

}  // namespace

TEST(ApplyShadowPass, DarkenedRegionBecomesShadow) {
  const hgr::Color bg{200, 160, 120};
  const hgr::Rect region{5, 5, 20, 15};
  const auto s = run_scene(bg, region, {0.6 * 200, 0.6 * 160, 0.6 * 120}, 2.0);
  const auto out = hgr::apply_shadow_pass(s.mask, s.last, s.model, {});
  std::size_t shadow = 0, total = 0;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x)
      if (region.contains(x, y)) {
        ++total;
        shadow += out.at(x, y) == Label::shadow;
      }
  EXPECT_GE(static_cast<double>(shadow) / total, 0.95);
}

TEST(ApplyShadowPass, OrthogonalChromaticityUntouched) {
  const hgr::Color bg{200, 0, 0};
  const hgr::Rect region{5, 5, 20, 15};
  const auto s = run_scene(bg, region, {0, 150, 0}, 0.0);
  ASSERT_GT(s.mask.count(Label::foreground), 0u);
  const auto out = hgr::apply_shadow_pass(s.mask, s.last, s.model, {});
  EXPECT_EQ(out.count(Label::shadow), 0u);
  EXPECT_EQ(out, s.mask);
}

TEST(ApplyShadowPass, AllBackgroundUnchanged) {
  const auto s = run_scene({90, 90, 90}, {0, 0, 0, 0}, {}, 1.0);
  ASSERT_EQ(s.mask.count(Label::foreground), 0u);
  EXPECT_EQ(hgr::apply_shadow_pass(s.mask, s.last, s.model, {}), s.mask);
}

TEST(ApplyShadowPass, OnlyForegroundBecomesShadow) {
  const auto s = run_scene({200, 160, 120}, {0, 0, 40, 15}, {120, 96, 72}, 3.0);
  const auto out = hgr::apply_shadow_pass(s.mask, s.last, s.model, {});
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Label before = s.mask.labels()[i], after = out.labels()[i];
    if (before != Label::foreground) EXPECT_EQ(after, before);
    else EXPECT_TRUE(after == Label::foreground || after == Label::shadow);
  }
}

TEST(ApplyShadowPass, GrayscaleRatioRule) {
  hgr::BackgroundModel model(4, 1, 1);
  hgr::Frame bg(4, 1, 1, {200, 200, 200, 200});
  for (int k = 0; k < 5; ++k) model.process_frame(bg);
  hgr::Frame f(4, 1, 1, {120, 20, 200, 199});  // 0.6 ratio, 0.1 ratio, same, same
  auto mask = model.process_frame(f);
  ASSERT_EQ(mask.at(0, 0), Label::foreground);
  ASSERT_EQ(mask.at(1, 0), Label::foreground);
  const auto out = hgr::apply_shadow_pass(mask, f, model, {});
  EXPECT_EQ(out.at(0, 0), Label::shadow);
  EXPECT_EQ(out.at(1, 0), Label::foreground);
}

TEST(ApplyShadowPass, DimensionMismatch) {
  hgr::BackgroundModel model(4, 4, 3);
  EXPECT_THROW(hgr::apply_shadow_pass(hgr::SegmentationMask(4, 4), hgr::Frame(5, 4, 3), model, {}),
               std::invalid_argument);
}
