#pragma once

#include <vector>

#include "shipbow/image.hpp"

namespace shipbow {

struct ScaleSpaceParams {
  int octaves = 4;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double contrast_threshold = 0.03;
  double edge_ratio = 10.0;
  /// Double the input before building octave 0. Off by default.
  bool upsample_input = false;

  /// Throws InvalidArgument when any field is out of range.
  void validate() const;

  friend bool operator==(const ScaleSpaceParams&, const ScaleSpaceParams&) = default;
};

/// A scale-space extremum. (x, y) and sigma are in the original image frame;
/// the octave-local fields identify where it was found in the pyramid.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
  double dog_response = 0.0;

  int octave = 0;
  int layer = 0;      // DoG layer index inside the octave, 1..scales_per_octave
  int octave_x = 0;   // integer location in the octave grid after refinement
  int octave_y = 0;

  /// Nearest pixel, clamped into a width x height image.
  PixelPoint pixel(int width, int height) const;
};

struct Octave {
  double scale = 1.0;                // original-frame pixels per octave pixel
  std::vector<GrayImage> gaussians;  // scales_per_octave + 3 layers
  std::vector<GrayImage> dogs;       // scales_per_octave + 2 layers
};

struct DogPyramid {
  std::vector<Octave> octaves;
  /// sigma of Gaussian layer i in octave-local pixels (identical for every octave)
  std::vector<double> layer_sigmas;
};

/// Sampled, normalized 1-D Gaussian kernel of radius ceil(4 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with clamp-to-edge borders.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Number of octaves actually built for an image of the given size: the
/// requested count, reduced so that the coarsest octave keeps >= 4 pixels on
/// its short side.
int effective_octaves(int width, int height, const ScaleSpaceParams& params);

/// Requires min(width, height) >= 16 (ImageTooSmall).
DogPyramid build_dog_pyramid(const GrayImage& img, const ScaleSpaceParams& params);

/// 3x3x3 strict extrema of the DoG stack, refined to sub-pixel accuracy and
/// filtered by contrast and edge tests. Sorted by (octave, layer, y, x).
std::vector<Keypoint> detect_keypoints(const GrayImage& img, const ScaleSpaceParams& params);

/// Same as detect_keypoints on a prebuilt pyramid of an image with the given size.
std::vector<Keypoint> detect_keypoints(const DogPyramid& pyramid, int width, int height,
                                       const ScaleSpaceParams& params);

}  // namespace shipbow
