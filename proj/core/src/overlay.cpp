#include "shipbow/overlay.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

namespace shipbow {

RgbImage render_keypoint_overlay(const PreparedImage& prepared, const SelectionResult& selection,
                                 const SelectionParams& params) {
  const RgbImage& src = prepared.image;
  const int w = src.width();
  const int h = src.height();
  cv::Mat canvas(h, w, CV_8UC3);
  std::copy(src.pixels().begin(), src.pixels().end(), canvas.data);

  const cv::Scalar yellow(255, 230, 0);
  const cv::Scalar green(0, 220, 60);
  const cv::Scalar magenta(230, 0, 230);
  for (const auto& kp : prepared.keypoints) {
    const PixelPoint p = kp.pixel(w, h);
    cv::circle(canvas, {p.x, p.y}, 1, yellow, cv::FILLED);
  }
  for (const auto& s : selection.selected) {
    const PixelPoint p = s.point.keypoint.pixel(w, h);
    if (s.enlarged) {
      const int half = std::max(3, params.enlarged_patch / 16);
      cv::rectangle(canvas, {p.x - half, p.y - half}, {p.x + half, p.y + half}, magenta, 1);
    } else {
      cv::circle(canvas, {p.x, p.y}, std::max(3, params.base_patch / 16), green, 1, cv::LINE_AA);
    }
  }

  std::vector<std::uint8_t> pixels(canvas.data, canvas.data + static_cast<std::size_t>(w) * h * 3);
  return RgbImage(w, h, std::move(pixels));
}

}  // namespace shipbow
