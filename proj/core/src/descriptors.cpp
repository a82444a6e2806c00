#include "shipbow/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "shipbow/error.hpp"

namespace shipbow {

void ProviderConfig::validate() const {
  if (output_dim < 1) throw Error(Errc::InvalidArgument, "output_dim must be >= 1");
  if (kind == ProviderKind::Deep) {
    if (!model_path) throw Error(Errc::ModelFileMissing, "deep provider requires model_path");
    if (input_side < 8) throw Error(Errc::InvalidArgument, "input_side must be >= 8");
    if (output_name.empty()) throw Error(Errc::InvalidArgument, "output_name must be set");
    for (double s : std)
      if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "normalization std must be > 0");
  }
}

Descriptor HandcraftedProvider::describe(const Patch& patch) const {
  const int side = patch.side;
  if (side < 8) throw Error(Errc::PatchTooSmall, "patch side must be >= 8");

  Descriptor out(kDimension, 0.0);
  const double n_pixels = static_cast<double>(side) * side;

  // Per-channel colour histograms, as fractions of the patch.
  std::vector<double> gray(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const auto r = patch.at(x, y, 0);
      const auto g = patch.at(x, y, 1);
      const auto b = patch.at(x, y, 2);
      out[0 * kColorBins + (r >> 4)] += 1.0;
      out[1 * kColorBins + (g >> 4)] += 1.0;
      out[2 * kColorBins + (b >> 4)] += 1.0;
      gray[static_cast<std::size_t>(y) * side + x] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    }
  }
  for (std::size_t i = 0; i < 3 * kColorBins; ++i) out[i] /= n_pixels;

  // Gradient blocks use the same stencil as gradient_magnitude().
  auto at = [&](int x, int y) { return gray[static_cast<std::size_t>(y) * side + x]; };
  double* grid = out.data() + 3 * kColorBins;
  double* orient = grid + kGrid * kGrid;
  std::vector<int> cell_count(kGrid * kGrid, 0);
  for (int y = 0; y < side; ++y) {
    const int y0 = std::max(y - 1, 0);
    const int y1 = std::min(y + 1, side - 1);
    const std::size_t cy = static_cast<std::size_t>(y) * kGrid / side;
    for (int x = 0; x < side; ++x) {
      const int x0 = std::max(x - 1, 0);
      const int x1 = std::min(x + 1, side - 1);
      const double gx = (at(x1, y) - at(x0, y)) / (x1 - x0 == 2 ? 2.0 : 1.0);
      const double gy = (at(x, y1) - at(x, y0)) / (y1 - y0 == 2 ? 2.0 : 1.0);
      const double mag = std::sqrt(gx * gx + gy * gy);
      const std::size_t cell = cy * kGrid + static_cast<std::size_t>(x) * kGrid / side;
      grid[cell] += mag;
      ++cell_count[cell];
      if (mag > 0.0) {
        double angle = std::atan2(gy, gx);
        if (angle < 0.0) angle += 2.0 * std::numbers::pi;
        auto bin = static_cast<std::size_t>(angle / (2.0 * std::numbers::pi) * kOrientationBins);
        orient[std::min(bin, kOrientationBins - 1)] += mag;
      }
    }
  }
  for (std::size_t c = 0; c < kGrid * kGrid; ++c) grid[c] /= cell_count[c];
  for (std::size_t b = 0; b < kOrientationBins; ++b) orient[b] /= n_pixels;

  double norm2 = 0.0;
  for (double v : out) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  for (double& v : out) v /= norm;
  return out;
}

namespace {

/// ONNX network run through OpenCV's DNN module. cv::dnn::Net::forward
/// mutates internal buffers, so calls are serialized.
class OnnxProvider final : public DescriptorProvider {
 public:
  explicit OnnxProvider(const ProviderConfig& config) : config_(config) {
    const auto& path = *config.model_path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(Errc::ModelFileMissing, path.string());
    try {
      net_ = cv::dnn::readNetFromONNX(path.string());
    } catch (const cv::Exception& e) {
      throw Error(Errc::ModelFormatInvalid, path.string() + ": " + e.what());
    }
    if (net_.empty()) throw Error(Errc::ModelFormatInvalid, path.string());
    net_.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net_.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    if (net_.getLayerId(config.output_name) < 0)
      throw Error(Errc::ModelFormatInvalid, "model has no output named '" + config.output_name + "'");

    const cv::Mat probe = run(cv::Mat::zeros(config.input_side, config.input_side, CV_8UC3));
    if (probe.total() != static_cast<std::size_t>(config.output_dim))
      throw Error(Errc::DimensionMismatch, "output '" + config.output_name + "' has " +
                                               std::to_string(probe.total()) + " values, expected " +
                                               std::to_string(config.output_dim));
  }

  std::size_t dimension() const override { return static_cast<std::size_t>(config_.output_dim); }
  bool thread_safe() const override { return false; }

  Descriptor describe(const Patch& patch) const override {
    if (patch.side < 8) throw Error(Errc::PatchTooSmall, "patch side must be >= 8");
    cv::Mat rgb(patch.side, patch.side, CV_8UC3, const_cast<std::uint8_t*>(patch.pixels.data()));
    const cv::Mat features = run(rgb);
    if (features.total() != dimension())
      throw Error(Errc::InferenceFailure, "unexpected output size " + std::to_string(features.total()));
    Descriptor out(dimension());
    const auto* src = features.ptr<float>();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = src[i];
      if (!std::isfinite(out[i])) throw Error(Errc::InferenceFailure, "non-finite activation");
    }
    return out;
  }

 private:
  cv::Mat run(const cv::Mat& rgb) const {
    const int side = config_.input_side;
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(side, side), 0, 0, cv::INTER_LINEAR);

    const int dims[] = {1, 3, side, side};
    cv::Mat blob(4, dims, CV_32F);
    auto* dst = blob.ptr<float>();
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int y = 0; y < side; ++y) {
      const auto* row = resized.ptr<cv::Vec3b>(y);
      for (int x = 0; x < side; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double v = (row[x][c] / 255.0 - config_.mean[c]) / config_.std[c];
          dst[c * plane + static_cast<std::size_t>(y) * side + x] = static_cast<float>(v);
        }
      }
    }

    std::lock_guard lock(mutex_);
    try {
      net_.setInput(blob);
      return net_.forward(config_.output_name).clone();
    } catch (const cv::Exception& e) {
      throw Error(Errc::InferenceFailure, e.what());
    }
  }

  ProviderConfig config_;
  mutable cv::dnn::Net net_;
  mutable std::mutex mutex_;
};

}  // namespace

std::unique_ptr<DescriptorProvider> load_provider(const ProviderConfig& config) {
  config.validate();
  if (config.kind == ProviderKind::Handcrafted) {
    if (static_cast<std::size_t>(config.output_dim) != HandcraftedProvider::kDimension)
      throw Error(Errc::DimensionMismatch, "handcrafted provider is 128-dimensional");
    return std::make_unique<HandcraftedProvider>();
  }
  return std::make_unique<OnnxProvider>(config);
}

std::vector<Descriptor> describe_selection(const DescriptorProvider& provider, const RgbImage& image,
                                           const SelectionResult& result, const SelectionParams& params) {
  std::vector<Descriptor> out;
  out.reserve(result.selected.size());
  for (const auto& entry : result.selected) {
    const int side = entry.enlarged ? params.enlarged_patch : params.base_patch;
    Patch patch = extract_patch(image, entry.point.keypoint.pixel(image.width(), image.height()), side);
    patch.enlarged = entry.enlarged;
    out.push_back(provider.describe(patch));
  }
  return out;
}

}  // namespace shipbow
