#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace shipbow {

/// Integer pixel coordinate.
struct PixelPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Row-major 8-bit RGB image. Channel order is always R, G, B.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);
  RgbImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int channel) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }
  std::uint8_t& at(int x, int y, int channel) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }
  bool contains(PixelPoint p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Row-major single-channel real image. Used both for luminance in [0,1] and
/// for derived real-valued planes (blurred layers, DoG layers).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Sample with coordinates clamped into the image.
  double clamped(int x, int y) const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-pixel gradient magnitude; same dimensions as the source image, all values >= 0.
class GradientField {
 public:
  GradientField() = default;
  GradientField(int width, int height, std::vector<double> magnitude);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int x, int y) const { return magnitude_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> magnitude() const noexcept { return magnitude_; }
  bool contains(PixelPoint p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> magnitude_;
};

/// Square RGB crop around a point.
struct Patch {
  PixelPoint center;
  int side = 0;
  std::vector<std::uint8_t> pixels;  // side * side * 3, row-major RGB
  bool enlarged = false;

  std::uint8_t at(int x, int y, int channel) const {
    return pixels[(static_cast<std::size_t>(y) * side + x) * 3 + channel];
  }
};

/// Decodes a PNG or JPEG file to RGB. Alpha is dropped, gray is replicated.
/// Throws FileNotFound, UnsupportedFormat or CorruptImage.
RgbImage load_image(const std::filesystem::path& path);

/// Writes a PNG. Throws IoError on failure.
void save_png(const RgbImage& img, const std::filesystem::path& path);

/// Rec. 601 luminance, normalized to [0,1].
GrayImage to_grayscale(const RgbImage& img);

/// Central differences in the interior, one-sided differences on the border.
/// Requires width >= 3 and height >= 3 (ImageTooSmall otherwise).
GradientField gradient_magnitude(const GrayImage& img);

/// Sum of magnitudes over the (2*half_width+1)^2 window around center,
/// intersected with the field.
double window_gradient_sum(const GradientField& field, PixelPoint center, int half_width);

/// side x side crop centered at center; pixels outside the image replicate the
/// nearest edge pixel. For even sides the extra column/row falls on the
/// low-coordinate side. Throws CenterOutOfBounds or InvalidArgument (side < 1).
Patch extract_patch(const RgbImage& img, PixelPoint center, int side);

}  // namespace shipbow
