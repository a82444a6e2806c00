#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shipbow {

/// Failure categories surfaced by every module. The CLI maps these to exit codes.
enum class Errc {
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  ImageTooSmall,
  CenterOutOfBounds,
  PointOutOfBounds,
  PatchTooSmall,
  ModelFileMissing,
  ModelFormatInvalid,
  DimensionMismatch,
  InferenceFailure,
  TooFewDescriptors,
  EmptyDescriptorSet,
  SingleClassInput,
  InvalidArgument,
  ZeroKeypoints,
  EmptyClass,
  NoClasses,
  EmptySplit,
  EmptyGrid,
  BundleFormatInvalid,
  ConfigInvalid,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace shipbow
