#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "shipbow/error.hpp"
#include "shipbow/image.hpp"
#include "test_support.hpp"

using namespace shipbow;
using shipbow::testing::TempDir;
using shipbow::testing::thrown_code;

namespace {

RgbImage random_rgb(int w, int h, std::mt19937& gen) {
  RgbImage img(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(byte(gen));
  return img;
}

GrayImage random_gray(int w, int h, std::mt19937& gen) {
  GrayImage img(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : img.values()) v = u(gen);
  return img;
}

}  // namespace

TEST(LoadImage, PngRoundTripKeepsPixels) {
  TempDir dir("img");
  RgbImage img(2, 2, {255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30});
  save_png(img, dir / "a.png");
  EXPECT_EQ(load_image(dir / "a.png"), img);
}

TEST(LoadImage, GrayscaleIsReplicated) {
  const RgbImage img = load_image(shipbow::testing::data_dir() / "gray_3x2.png");
  ASSERT_EQ(img.width(), 3);
  ASSERT_EQ(img.height(), 2);
  const int expected[2][3] = {{0, 128, 255}, {17, 200, 90}};
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(img.at(x, y, c), expected[y][x]);
}

TEST(LoadImage, Errors) {
  TempDir dir("img");
  EXPECT_EQ(thrown_code([&] { load_image(dir / "missing.png"); }), Errc::FileNotFound);
  std::ofstream(dir / "fake.png") << "not an image";
  EXPECT_EQ(thrown_code([&] { load_image(dir / "fake.png"); }), Errc::CorruptImage);
  std::ofstream(dir / "notes.txt") << "plain text";
  EXPECT_EQ(thrown_code([&] { load_image(dir / "notes.txt"); }), Errc::UnsupportedFormat);

  // Valid signature, truncated body.
  save_png(RgbImage(8, 8), dir / "ok.png");
  std::ifstream in(dir / "ok.png", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(dir / "cut.png", std::ios::binary) << bytes.substr(0, 20);
  EXPECT_EQ(thrown_code([&] { load_image(dir / "cut.png"); }), Errc::CorruptImage);
}

TEST(Grayscale, KnownValues) {
  RgbImage img(3, 1, {0, 0, 0, 255, 255, 255, 255, 0, 0});
  const GrayImage g = to_grayscale(img);
  EXPECT_DOUBLE_EQ(g.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g.at(1, 0), 1.0);
  EXPECT_NEAR(g.at(2, 0), 0.299, 1e-12);
}

TEST(Grayscale, AlwaysInUnitRange) {
  std::mt19937 gen(3);
  for (int t = 0; t < 20; ++t) {
    const GrayImage g = to_grayscale(random_rgb(17, 9, gen));
    for (double v : g.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Gradient, ConstantImageIsZero) {
  const GradientField f = gradient_magnitude(GrayImage(10, 7, 0.4));
  for (double v : f.magnitude()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, VerticalStep) {
  const int w = 12, h = 8, c = 6;
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = c; x < w; ++x) img.at(x, y) = 1.0;
  const GradientField f = gradient_magnitude(img);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) EXPECT_DOUBLE_EQ(f.at(x, y), (x == c - 1 || x == c) ? 0.5 : 0.0);
}

TEST(Gradient, HorizontalRamp) {
  const int w = 9, h = 5;
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<double>(x) / (w - 1);
  const GradientField f = gradient_magnitude(img);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) EXPECT_NEAR(f.at(x, y), 1.0 / (w - 1), 1e-12);
}

TEST(Gradient, MatchesStencilOracleIncludingBorders) {
  std::mt19937 gen(11);
  const GrayImage img = random_gray(7, 6, gen);
  const GradientField f = gradient_magnitude(img);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) {
      double gx, gy;
      if (x == 0) gx = img.at(1, y) - img.at(0, y);
      else if (x == 6) gx = img.at(6, y) - img.at(5, y);
      else gx = (img.at(x + 1, y) - img.at(x - 1, y)) / 2;
      if (y == 0) gy = img.at(x, 1) - img.at(x, 0);
      else if (y == 5) gy = img.at(x, 5) - img.at(x, 4);
      else gy = (img.at(x, y + 1) - img.at(x, y - 1)) / 2;
      EXPECT_DOUBLE_EQ(f.at(x, y), std::sqrt(gx * gx + gy * gy));
    }
}

TEST(Gradient, TooSmall) {
  EXPECT_EQ(thrown_code([] { gradient_magnitude(GrayImage(2, 5)); }), Errc::ImageTooSmall);
  EXPECT_EQ(thrown_code([] { gradient_magnitude(GrayImage(5, 2)); }), Errc::ImageTooSmall);
}

TEST(WindowSum, SimpleCases) {
  const GradientField zero(9, 9, std::vector<double>(81, 0.0));
  EXPECT_EQ(window_gradient_sum(zero, {4, 4}, 3), 0.0);
  std::vector<double> one(81, 0.0);
  one[4 * 9 + 4] = 2.5;
  EXPECT_EQ(window_gradient_sum(GradientField(9, 9, one), {4, 4}, 3), 2.5);
}

TEST(WindowSum, MatchesBruteForceAndIsMonotone) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> px(0, 14), py(0, 10);
  std::vector<double> m(15 * 11);
  for (auto& v : m) v = u(gen);
  const GradientField f(15, 11, m);
  for (int t = 0; t < 200; ++t) {
    const PixelPoint c{px(gen), py(gen)};
    double prev = -1.0;
    for (int hw = 0; hw <= 6; ++hw) {
      double oracle = 0.0;
      for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 15; ++x)
          if (std::abs(x - c.x) <= hw && std::abs(y - c.y) <= hw) oracle += f.at(x, y);
      const double got = window_gradient_sum(f, c, hw);
      EXPECT_NEAR(got, oracle, 1e-9);
      EXPECT_GE(got, prev);
      prev = got;
    }
  }
}

TEST(WindowSum, StepEdgeCenterOnEdge) {
  GrayImage img(20, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 10; x < 20; ++x) img.at(x, y) = 1.0;
  const GradientField f = gradient_magnitude(img);
  // Columns 9 and 10 carry 0.5 on every covered row: 7 rows x 2 columns.
  EXPECT_DOUBLE_EQ(window_gradient_sum(f, {10, 10}, 3), 7.0);
}

TEST(ExtractPatch, InteriorIsExactCrop) {
  std::mt19937 gen(9);
  const RgbImage img = random_rgb(30, 20, gen);
  const Patch p = extract_patch(img, {15, 10}, 8);
  ASSERT_EQ(p.side, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(p.at(x, y, c), img.at(15 - 4 + x, 10 - 4 + y, c));
}

TEST(ExtractPatch, CornerMatchesClampLoop) {
  std::mt19937 gen(10);
  const RgbImage img = random_rgb(12, 10, gen);
  for (PixelPoint center : {PixelPoint{0, 0}, PixelPoint{11, 9}, PixelPoint{0, 9}, PixelPoint{5, 0}}) {
    for (int side : {1, 8, 9}) {
      const Patch p = extract_patch(img, center, side);
      const int left = center.x - side / 2;
      const int top = center.y - side / 2;
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
          int sx = left + x, sy = top + y;
          while (sx < 0) ++sx;
          while (sx > 11) --sx;
          while (sy < 0) ++sy;
          while (sy > 9) --sy;
          for (int c = 0; c < 3; ++c) ASSERT_EQ(p.at(x, y, c), img.at(sx, sy, c));
        }
    }
  }
}

TEST(ExtractPatch, TranslationConsistent) {
  std::mt19937 gen(12);
  const RgbImage img = random_rgb(40, 40, gen);
  RgbImage shifted(40, 40);
  const int dx = 5, dy = 3;
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      for (int c = 0; c < 3; ++c) shifted.at(x, y, c) = img.at(std::max(x - dx, 0), std::max(y - dy, 0), c);
  const Patch a = extract_patch(img, {15, 15}, 9);
  const Patch b = extract_patch(shifted, {15 + dx, 15 + dy}, 9);
  EXPECT_EQ(a.pixels, b.pixels);
}

TEST(ExtractPatch, Errors) {
  const RgbImage img(10, 10);
  EXPECT_EQ(thrown_code([&] { extract_patch(img, {10, 3}, 5); }), Errc::CenterOutOfBounds);
  EXPECT_EQ(thrown_code([&] { extract_patch(img, {-1, 3}, 5); }), Errc::CenterOutOfBounds);
  EXPECT_EQ(thrown_code([&] { extract_patch(img, {3, 3}, 0); }), Errc::InvalidArgument);
}
