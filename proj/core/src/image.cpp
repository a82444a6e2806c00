#include "shipbow/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "shipbow/error.hpp"

namespace shipbow {

namespace fs = std::filesystem;

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * height * 3, 0) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "image dimensions must be >= 1");
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "image dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error(Errc::InvalidArgument, "pixel buffer length must be width*height*3");
}

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * height)
    throw Error(Errc::InvalidArgument, "value buffer length must be width*height");
}

double GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

GradientField::GradientField(int width, int height, std::vector<double> magnitude)
    : width_(width), height_(height), magnitude_(std::move(magnitude)) {}

namespace {

enum class Signature { Png, Jpeg, Other };

Signature sniff(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = in.gcount();
  static constexpr std::array<unsigned char, 8> kPng = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (got == 8 && head == kPng) return Signature::Png;
  if (got >= 3 && head[0] == 0xff && head[1] == 0xd8 && head[2] == 0xff) return Signature::Jpeg;
  return Signature::Other;
}

bool has_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

RgbImage load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(Errc::FileNotFound, path.string());

  if (sniff(path) == Signature::Other) {
    // A file named like an image that is not one is corrupt; anything else is
    // simply a format we do not read.
    if (has_image_extension(path)) throw Error(Errc::CorruptImage, path.string());
    throw Error(Errc::UnsupportedFormat, path.string());
  }

  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(Errc::CorruptImage, path.string() + ": " + e.what());
  }
  if (bgr.empty() || bgr.type() != CV_8UC3) throw Error(Errc::CorruptImage, path.string());

  RgbImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = row[x][2];
      img.at(x, y, 1) = row[x][1];
      img.at(x, y, 2) = row[x][0];
    }
  }
  return img;
}

void save_png(const RgbImage& img, const fs::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x)
      row[x] = cv::Vec3b(img.at(x, y, 2), img.at(x, y, 1), img.at(x, y, 0));
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw Error(Errc::IoError, "cannot write " + path.string());
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double lum = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      out.at(x, y) = std::clamp(lum / 255.0, 0.0, 1.0);
    }
  }
  return out;
}

GradientField gradient_magnitude(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) throw Error(Errc::ImageTooSmall, "gradient needs at least 3x3 pixels");

  auto diff = [](double lo, double hi, bool central) { return central ? (hi - lo) / 2.0 : hi - lo; };

  std::vector<double> mag(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(y - 1, 0);
    const int y1 = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(x - 1, 0);
      const int x1 = std::min(x + 1, w - 1);
      const double gx = diff(img.at(x0, y), img.at(x1, y), x1 - x0 == 2);
      const double gy = diff(img.at(x, y0), img.at(x, y1), y1 - y0 == 2);
      mag[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return GradientField(w, h, std::move(mag));
}

double window_gradient_sum(const GradientField& field, PixelPoint center, int half_width) {
  if (half_width < 0) throw Error(Errc::InvalidArgument, "half_width must be >= 0");
  const int x0 = std::max(center.x - half_width, 0);
  const int x1 = std::min(center.x + half_width, field.width() - 1);
  const int y0 = std::max(center.y - half_width, 0);
  const int y1 = std::min(center.y + half_width, field.height() - 1);
  double sum = 0.0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) sum += field.at(x, y);
  return sum;
}

Patch extract_patch(const RgbImage& img, PixelPoint center, int side) {
  if (side < 1) throw Error(Errc::InvalidArgument, "patch side must be >= 1");
  if (!img.contains(center)) throw Error(Errc::CenterOutOfBounds, "patch center outside image");

  Patch patch;
  patch.center = center;
  patch.side = side;
  patch.pixels.resize(static_cast<std::size_t>(side) * side * 3);
  const int left = center.x - side / 2;
  const int top = center.y - side / 2;
  auto* dst = patch.pixels.data();
  for (int row = 0; row < side; ++row) {
    const int sy = std::clamp(top + row, 0, img.height() - 1);
    for (int col = 0; col < side; ++col) {
      const int sx = std::clamp(left + col, 0, img.width() - 1);
      for (int c = 0; c < 3; ++c) *dst++ = img.at(sx, sy, c);
    }
  }
  return patch;
}

}  // namespace shipbow
