#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shipbow/image.hpp"
#include "shipbow/selection.hpp"

namespace shipbow {

/// Fixed-dimension real feature vector of one patch.
using Descriptor = std::vector<double>;

enum class ProviderKind { Deep, Handcrafted };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Handcrafted;
  std::optional<std::filesystem::path> model_path;  // deep only
  std::string output_name = "features";              // penultimate tensor in the model file
  int input_side = 224;
  int output_dim = 128;
  // Input normalization applied per RGB channel: (value / 255 - mean) / std.
  std::array<double, 3> mean = {0.485, 0.456, 0.406};
  std::array<double, 3> std = {0.229, 0.224, 0.225};

  void validate() const;
};

class DescriptorProvider {
 public:
  virtual ~DescriptorProvider() = default;

  virtual std::size_t dimension() const = 0;

  /// Throws PatchTooSmall for side < 8, InferenceFailure on backend errors.
  virtual Descriptor describe(const Patch& patch) const = 0;

  /// False when describe() must not be called from several threads at once.
  virtual bool thread_safe() const = 0;
};

/// 48 RGB histogram bins (16 per channel), 64 cells of mean gradient magnitude
/// on an 8x8 grid, 16 gradient-orientation bins; L2-normalized.
class HandcraftedProvider final : public DescriptorProvider {
 public:
  static constexpr std::size_t kColorBins = 16;
  static constexpr std::size_t kGrid = 8;
  static constexpr std::size_t kOrientationBins = 16;
  static constexpr std::size_t kDimension = 3 * kColorBins + kGrid * kGrid + kOrientationBins;

  std::size_t dimension() const override { return kDimension; }
  Descriptor describe(const Patch& patch) const override;
  bool thread_safe() const override { return true; }
};

/// Loads the configured provider. Deep: ModelFileMissing, ModelFormatInvalid,
/// DimensionMismatch when the named output is not output_dim wide.
std::unique_ptr<DescriptorProvider> load_provider(const ProviderConfig& config);

/// Describes every selected entry, using the enlarged patch side for enlarged
/// entries. Output order follows the selection.
std::vector<Descriptor> describe_selection(const DescriptorProvider& provider, const RgbImage& image,
                                           const SelectionResult& result, const SelectionParams& params);

}  // namespace shipbow
