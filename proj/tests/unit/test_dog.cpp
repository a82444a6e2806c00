#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "shipbow/dog.hpp"
#include "test_support.hpp"

using namespace shipbow;
using shipbow::testing::blob_image;
using shipbow::testing::thrown_code;

namespace {

double sampled_gaussian(double sigma, int d) {
  const int r = static_cast<int>(std::ceil(4 * sigma));
  if (std::abs(d) > r) return 0.0;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += std::exp(-i * i / (2 * sigma * sigma));
  return std::exp(-d * d / (2 * sigma * sigma)) / sum;
}

GrayImage random_texture(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  for (auto& v : img.values()) v = u(gen);
  // A little smoothing so the detector finds a moderate number of blobs.
  return gaussian_blur(img, 1.0);
}

// Randomly placed Gaussian blobs of mixed size and sign on a mid-gray field.
GrayImage blob_field(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> px(0.0, w), py(0.0, h), sig(1.5, 5.0), amp(-1.0, 1.0);
  GrayImage img(w, h, 0.5);
  for (int n = 0; n < 200; ++n) {
    const double cx = px(gen), cy = py(gen), s = sig(gen), a = amp(gen) < 0 ? -0.3 : 0.3;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(x, y) += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
  }
  return img;
}

}  // namespace

TEST(GaussianKernel, NormalizedSymmetricRadius) {
  for (double s : {0.5, 1.0, 1.6, 3.3}) {
    const auto k = gaussian_kernel(s);
    const int r = static_cast<int>(std::ceil(4 * s));
    ASSERT_EQ(k.size(), static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      sum += k[i];
      EXPECT_DOUBLE_EQ(k[i], k[k.size() - 1 - i]);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Pyramid, LayerCounts) {
  const DogPyramid pyr = build_dog_pyramid(GrayImage(128, 128, 0.5), {});
  ASSERT_EQ(pyr.octaves.size(), 4u);
  for (std::size_t o = 0; o < pyr.octaves.size(); ++o) {
    EXPECT_EQ(pyr.octaves[o].gaussians.size(), 6u);
    EXPECT_EQ(pyr.octaves[o].dogs.size(), 5u);
    EXPECT_EQ(pyr.octaves[o].dogs[0].width(), 128 >> o);
  }
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(pyr.layer_sigmas[i], 1.6 * std::pow(2.0, i / 3.0), 1e-12);
}

TEST(Pyramid, ConstantImageHasZeroDogs) {
  const DogPyramid pyr = build_dog_pyramid(GrayImage(64, 48, 0.7), {});
  for (const auto& oct : pyr.octaves)
    for (const auto& d : oct.dogs)
      for (double v : d.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Pyramid, ImpulseMatchesDirectConvolution) {
  GrayImage img(64, 64);
  img.at(32, 32) = 1.0;
  const DogPyramid pyr = build_dog_pyramid(img, {});
  const auto& sig = pyr.layer_sigmas;
  for (int i = 0; i < 5; ++i) {
    const GrayImage& d = pyr.octaves[0].dogs[i];
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double hi = sampled_gaussian(sig[i + 1], x - 32) * sampled_gaussian(sig[i + 1], y - 32);
        const double lo = sampled_gaussian(sig[i], x - 32) * sampled_gaussian(sig[i], y - 32);
        ASSERT_NEAR(d.at(x, y), hi - lo, 1e-12) << "layer " << i << " at " << x << "," << y;
      }
  }
}

TEST(Pyramid, OctavesShrinkOnSmallImages) {
  EXPECT_EQ(effective_octaves(16, 200, {}), 3);
  EXPECT_EQ(effective_octaves(128, 128, {}), 4);
  ScaleSpaceParams p;
  p.octaves = 8;
  EXPECT_EQ(effective_octaves(64, 64, p), 5);
}

TEST(Pyramid, TooSmall) {
  EXPECT_EQ(thrown_code([] { build_dog_pyramid(GrayImage(15, 40), {}); }), Errc::ImageTooSmall);
  EXPECT_EQ(thrown_code([] { detect_keypoints(GrayImage(40, 15), ScaleSpaceParams{}); }), Errc::ImageTooSmall);
}

TEST(Detect, ConstantImageHasNoKeypoints) {
  EXPECT_TRUE(detect_keypoints(GrayImage(64, 64, 0.3), ScaleSpaceParams{}).empty());
}

TEST(Detect, SingleBlob) {
  const auto kps = detect_keypoints(blob_image(128, 128, 64, 64, 4), ScaleSpaceParams{});
  ASSERT_EQ(kps.size(), 1u);
  EXPECT_LE(std::hypot(kps[0].x - 64, kps[0].y - 64), 2.0);
  EXPECT_GT(kps[0].sigma, 0.0);
}

TEST(Detect, TwoBlobs) {
  GrayImage img = blob_image(128, 128, 32, 40, 4);
  const GrayImage other = blob_image(128, 128, 96, 90, 4);
  for (std::size_t i = 0; i < img.values().size(); ++i) img.values()[i] += other.values()[i];
  const auto kps = detect_keypoints(img, ScaleSpaceParams{});
  ASSERT_EQ(kps.size(), 2u);
  int near_a = 0, near_b = 0;
  for (const auto& k : kps) {
    near_a += std::hypot(k.x - 32, k.y - 40) <= 2.0;
    near_b += std::hypot(k.x - 96, k.y - 90) <= 2.0;
  }
  EXPECT_EQ(near_a, 1);
  EXPECT_EQ(near_b, 1);
}

namespace {

// Detects in two windows of one texture offset by (dx, dy) and checks that
// every interior keypoint of the first window up to max_octave reappears
// shifted in the second.
void expect_shifted(int dx, int dy, int max_octave) {
  const GrayImage base = blob_field(176, 176, 21);
  GrayImage a(128, 128), b(128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) {
      a.at(x, y) = base.at(x + dx, y + dy);
      b.at(x, y) = base.at(x, y);
    }
  // Content at (x, y) in a sits at (x + dx, y + dy) in b.
  const auto ka = detect_keypoints(a, ScaleSpaceParams{});
  const auto kb = detect_keypoints(b, ScaleSpaceParams{});
  int checked = 0, matched = 0;
  for (const auto& p : ka) {
    if (p.octave > max_octave) continue;
    const double margin = 4 * p.sigma + 8;
    if (p.x < margin || p.y < margin || p.x + dx > 128 - margin || p.y + dy > 128 - margin) continue;
    ++checked;
    for (const auto& q : kb)
      if (q.octave == p.octave && q.layer == p.layer && std::hypot(q.x - (p.x + dx), q.y - (p.y + dy)) <= 1.0) {
        ++matched;
        break;
      }
  }
  ASSERT_GE(checked, 5);
  EXPECT_EQ(matched, checked) << "shift " << dx << "," << dy;
}

}  // namespace

TEST(Detect, TranslationEquivariance) {
  // Odd shifts change the subsampling phase of coarser octaves, so only the
  // full-resolution octave is compared for them.
  expect_shifted(7, 11, 0);
  expect_shifted(16, 8, 3);
}

TEST(Detect, BlobTranslationMovesKeypoint) {
  const auto a = detect_keypoints(blob_image(128, 128, 50, 45, 4), ScaleSpaceParams{});
  const auto b = detect_keypoints(blob_image(128, 128, 57, 56, 4), ScaleSpaceParams{});
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(b[0].x - a[0].x, 7.0, 1.0);
  EXPECT_NEAR(b[0].y - a[0].y, 11.0, 1.0);
}

TEST(Detect, KeypointsPassContrastAndEdgeTests) {
  const GrayImage img = random_texture(96, 80, 4);
  const ScaleSpaceParams params;
  const DogPyramid pyr = build_dog_pyramid(img, params);
  const auto kps = detect_keypoints(pyr, img.width(), img.height(), params);
  ASSERT_FALSE(kps.empty());
  const double r = params.edge_ratio;
  for (const auto& k : kps) {
    EXPECT_GE(std::abs(k.dog_response), params.contrast_threshold);
    EXPECT_GE(k.x, 0.0);
    EXPECT_LT(k.x, img.width());
    EXPECT_GE(k.y, 0.0);
    EXPECT_LT(k.y, img.height());
    EXPECT_GT(k.sigma, 0.0);
    const GrayImage& d = pyr.octaves[k.octave].dogs[k.layer];
    const int x = k.octave_x, y = k.octave_y;
    const double dxx = d.at(x + 1, y) + d.at(x - 1, y) - 2 * d.at(x, y);
    const double dyy = d.at(x, y + 1) + d.at(x, y - 1) - 2 * d.at(x, y);
    const double dxy = (d.at(x + 1, y + 1) - d.at(x + 1, y - 1) - d.at(x - 1, y + 1) + d.at(x - 1, y - 1)) / 4;
    const double det = dxx * dyy - dxy * dxy;
    const double tr = dxx + dyy;
    EXPECT_GT(det, 0.0);
    EXPECT_LT(tr * tr / det, (r + 1) * (r + 1) / r);
  }
}

TEST(Detect, DeterministicAndSorted) {
  const GrayImage img = random_texture(100, 90, 8);
  const auto a = detect_keypoints(img, ScaleSpaceParams{});
  const auto b = detect_keypoints(img, ScaleSpaceParams{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
    EXPECT_EQ(a[i].sigma, b[i].sigma);
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto key = [](const Keypoint& k) { return std::make_tuple(k.octave, k.layer, k.y, k.x); };
    EXPECT_LE(key(a[i - 1]), key(a[i]));
  }
}

TEST(Params, Validation) {
  ScaleSpaceParams p;
  p.edge_ratio = 1.0;
  EXPECT_EQ(thrown_code([&] { p.validate(); }), Errc::InvalidArgument);
  p = {};
  p.octaves = 0;
  EXPECT_EQ(thrown_code([&] { p.validate(); }), Errc::InvalidArgument);
}
